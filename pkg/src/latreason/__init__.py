"""latreason: interval-annotated temporal logic programs over graphs.

Open-world reasoning with a lower semi-lattice of interval truth values,
delayed rules for non-Markovian dynamics, on-demand (skolemized) grounding,
explainable traces, a KG-completion harness, and a step-based simulation
service.
"""

from .intervals import (
    BOTTOM,
    FALSE,
    TRUE,
    AnnConst,
    AnnFunc,
    AnnVar,
    InconsistentSup,
    Interval,
    eval_annotation,
    leq,
    negate,
    register_annotation_function,
    sup,
)
from .model import (
    Atom,
    AnnotatedLiteral,
    DEFAULT_THRESHOLD,
    Program,
    Rule,
    SkolemBinding,
    TemporalFact,
    Threshold,
    Var,
    ground,
    validate,
)
from .parsing import (
    ParseError,
    parse_fact,
    parse_fact_file,
    parse_interval,
    parse_rule,
    parse_rule_file,
    serialize_fact,
    serialize_interval,
    serialize_rule,
)
from .graphio import GraphDocument, graph_from_triples, load_graph, read_graphml, read_triples
from .store import InterpretationStore, UpdateOutcome, check_consistency
from .grounding import (
    ApplicableInstance,
    ConstructedEntity,
    ground_rule,
    grid_constructor,
    map_constructor,
    replace_constructor,
    template_constructor,
)
from .engine import (
    Engine,
    EngineConfig,
    RunResult,
    RunStatus,
    StepStats,
    check_entailment,
    compute_growth_bound,
    run,
)
from .tracing import TraceEntry, TraceLog, parse_trace

__version__ = "0.1.0"
