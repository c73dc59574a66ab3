import os
import random

import pytest

from latreason.engine import (
    Engine,
    EngineConfig,
    EntailmentQueryError,
    RunStatus,
    check_entailment,
    compute_growth_bound,
    run,
)
from latreason.intervals import BOTTOM, TRUE, leq
from latreason.model import Atom, Program, TemporalFact
from latreason.parsing import parse_fact, parse_rule

from oracles import random_consistent_program


def simple_program(t_max=4):
    return Program(
        rules=(
            parse_rule("rule_1 :: b(X):[1,1] <-1 a(X):[1,1]"),
            parse_rule("rule_2 :: c(X):[1,1] <-0 b(X):[1,1]"),
        ),
        facts=(parse_fact("a(x):[1,1] @ [1,1]"), parse_fact("a(x):[1,1] @ [3,3]")),
        t_max=t_max,
    )


def nonbottom(rows):
    return {(s, p): str(iv) for s, p, iv, _static in rows}


def test_two_rule_cascade_interpretation_evolution():
    res = run(simple_program(), EngineConfig(t_max=4, persistent=False))
    assert res.status is RunStatus.CONVERGED
    assert nonbottom(res.history[1]) == {("x", "a"): "[1.0,1.0]"}
    assert nonbottom(res.history[2]) == {("x", "b"): "[1.0,1.0]", ("x", "c"): "[1.0,1.0]"}
    assert nonbottom(res.history[3]) == {("x", "a"): "[1.0,1.0]"}
    assert nonbottom(res.history[4]) == {("x", "b"): "[1.0,1.0]", ("x", "c"): "[1.0,1.0]"}


def test_converged_store_yields_zero_updates():
    res = run(simple_program(), EngineConfig(t_max=4, persistent=False))
    # the last apply pass at every time point confirmed the fixpoint
    for s in res.stats:
        assert s.changed >= 0
    final_steps = {}
    for s in res.stats:
        final_steps[s.t] = s
    for t, s in final_steps.items():
        assert s.changed == 0 or s.fp_step >= 1


def test_sup_merge_of_competing_proposals():
    prog = Program(
        rules=(
            parse_rule("r_low :: h(X):[0.6,1] <-0 a(X):[1,1]"),
            parse_rule("r_high :: h(X):[0.8,1] <-0 a(X):[1,1]"),
        ),
        facts=(parse_fact("a(x):[1,1] @ [0,0]"),),
        t_max=0,
    )
    res = run(prog, EngineConfig(t_max=0))
    assert nonbottom(res.history[0])[("x", "h")] == "[0.8,1.0]"
    # a single trace row records the merged update
    rows = [e for e in res.trace if e.predicate == "h"]
    assert len(rows) == 1
    assert str(rows[0].new) == "[0.8,1.0]"


def test_empty_rule_set_runs_one_application_per_t():
    prog = Program(facts=(parse_fact("a(x):[1,1] @ [0,2]"),), t_max=2)
    res = run(prog, EngineConfig(t_max=2, persistent=False))
    assert res.fp_counts == [1, 1, 1]
    assert res.status is RunStatus.CONVERGED


def test_growth_bound_formula():
    prog = Program(
        rules=(
            parse_rule("h(X):[1,1] <-0 p(X):[1,1], q(X,Y):[1,1]"),
            parse_rule("g(X):[1,1] <-0 r(X):[1,1]"),
        ),
        t_max=0,
    )
    bound = compute_growth_bound(prog, {"p": 3, "q": 2, "r": 4})
    assert bound == 3 * 2 + 4
    assert compute_growth_bound(prog, {"p": 3, "q": 2}) == 6  # empty product factor


def test_growth_bound_kg_example():
    prog = Program(
        rules=(parse_rule("citizenOf(X,Y):[1,1] <-0 bornIn(X,Z):[1,1], cityIn(Z,Y):[1,1]"),),
        t_max=0,
    )
    assert compute_growth_bound(prog, {"bornIn": 1, "cityIn": 1}) == 1


def test_entailment_queries():
    res = run(simple_program(), EngineConfig(t_max=4, persistent=False))
    assert check_entailment(res, Atom("c", ("x",)), TRUE, 2)
    assert not check_entailment(res, Atom("c", ("x",)), TRUE, 1)
    assert check_entailment(res, Atom("zzz", ("never",)), BOTTOM, 3)


def test_entailment_requires_convergence():
    prog = Program(
        rules=(
            parse_rule("p(X):[1,1] <-0 a(X):[1,1]"),
            parse_rule("np :: p(X):[0,0] <-0 a(X):[1,1]"),
        ),
        facts=(parse_fact("a(x):[1,1] @ [0,0]"),),
        t_max=0,
    )
    res = run(prog, EngineConfig(t_max=0, abort_on_inconsistency=True))
    assert res.status is RunStatus.INCONSISTENT
    with pytest.raises(EntailmentQueryError):
        check_entailment(res, Atom("p", ("x",)), TRUE, 0)


def test_forced_contradiction_detected_and_resolved():
    prog = Program(
        rules=(
            parse_rule("yes :: p(X):[1,1] <-0 a(X):[1,1]"),
            parse_rule("no :: p(X):[0,0] <-0 a(X):[1,1]"),
        ),
        facts=(parse_fact("a(x):[1,1] @ [0,0]"),),
        t_max=0,
    )
    res = run(prog, EngineConfig(t_max=0, inconsistency_mode="resolve"))
    assert res.status is RunStatus.CONVERGED
    assert ("x", "p") in res.store.inconsistent_set
    assert res.store.value("x", "p") == BOTTOM and res.store.is_static("x", "p")


def test_rule_set_static_pins_head():
    prog = Program(
        rules=(
            parse_rule("pin :: p(X):[1,1] <-0 a(X):[1,1] static"),
            parse_rule("later :: p(X):[0,0] <-1 a(X):[1,1]"),
        ),
        facts=(parse_fact("a(x):[1,1] @ [0,1]"),),
        t_max=1,
    )
    res = run(prog, EngineConfig(t_max=1, persistent=True))
    assert res.status is RunStatus.CONVERGED
    # the delayed [0,0] head is blocked by the static pin, not inconsistent
    assert nonbottom(res.history[1])[("x", "p")] == "[1.0,1.0]"
    assert not res.store.inconsistent_set


def test_delayed_head_beyond_horizon_is_skipped():
    prog = Program(
        rules=(parse_rule("b(X):[1,1] <-3 a(X):[1,1]"),),
        facts=(parse_fact("a(x):[1,1] @ [0,0]"),),
        t_max=1,
    )
    res = run(prog, EngineConfig(t_max=1))
    assert all(("x", "b") not in nonbottom(rows) for rows in res.history)


def test_cap_exceeded_status():
    # an immediate-rule ladder longer than the allowed applications per t
    rules = [parse_rule(f"p{i+1}(X):[1,1] <-0 p{i}(X):[1,1]") for i in range(6)]
    prog = Program(rules=tuple(rules), facts=(parse_fact("p0(x):[1,1] @ [0,0]"),), t_max=0)
    res = run(prog, EngineConfig(t_max=0, max_fp_iterations=2))
    assert res.status is RunStatus.CAP_EXCEEDED
    full = run(prog, EngineConfig(t_max=0, max_fp_iterations=100))
    assert full.status is RunStatus.CONVERGED
    assert ("x", "p6") in nonbottom(full.history[0])


def test_monotone_iterates_on_consistent_programs():
    rng = random.Random(11)
    for _ in range(40):
        prog = random_consistent_program(rng, max_rules=8, max_constants=12)
        res = run(prog, EngineConfig(t_max=prog.t_max, persistent=False))
        assert res.status is RunStatus.CONVERGED
        assert not res.store.inconsistent_set
        # within a time point every change tightens the annotation
        for e in res.trace:
            assert leq(e.old, e.new)


def test_engine_matches_saturation_reference():
    """The phased loop and a plain saturation evaluator agree on the full
    per-time-point interpretation for randomized consistent programs."""
    from oracles import reference_run

    rng = random.Random(99)
    for trial in range(60):
        prog = random_consistent_program(rng, max_rules=8, max_constants=12)
        persistent = rng.random() < 0.5
        res = run(prog, EngineConfig(t_max=prog.t_max, persistent=persistent))
        want = reference_run(prog, persistent)
        got = [
            {(s, p): str(iv) for s, p, iv, _static in rows} for rows in res.history
        ]
        ref = [
            {(s, p): str(iv) for s, p, iv, _static in rows} for rows in want
        ]
        assert got == ref, f"trial {trial} diverged (persistent={persistent})"


def test_theorem4_bound_on_random_runs():
    rng = random.Random(13)
    for _ in range(40):
        prog = random_consistent_program(rng, max_rules=10, max_constants=15)
        res = run(prog, EngineConfig(t_max=prog.t_max, persistent=rng.random() < 0.5))
        for s in res.stats:
            assert s.delta_total <= s.bound, (s, prog.rules)


def test_quantized_cap_enforced_and_converges():
    rng = random.Random(17)
    for _ in range(25):
        prog = random_consistent_program(rng, max_rules=6, max_constants=10)
        res = run(
            prog,
            EngineConfig(t_max=prog.t_max, quantize_decimals=1, persistent=False),
        )
        assert res.status is RunStatus.CONVERGED


def test_determinism_across_worker_counts(monkeypatch):
    prog_exports = []
    for workers in (1, 2, 8):
        monkeypatch.setenv("LATREASON_THREADS", str(workers))
        res = run(simple_program(), EngineConfig(t_max=4, parallel=workers > 1))
        prog_exports.append(res.trace.export("tsv"))
    assert prog_exports[0] == prog_exports[1] == prog_exports[2]


def test_per_step_stats_record_per_predicate_counts():
    res = run(simple_program(), EngineConfig(t_max=4))
    last = res.stats[-1]
    assert last.per_pred["a"] == 1 and last.per_pred["b"] == 1 and last.per_pred["c"] == 1
    csv_text = res.stats_csv()
    assert csv_text.splitlines()[0] == "step,predicate,count,delta_total,theorem4_bound"


def test_volatile_predicates_reset_under_persistence():
    prog = Program(
        rules=(parse_rule("seen(X):[1,1] <-0 act(X):[1,1]"),),
        facts=(parse_fact("act(x):[1,1] @ [0,0]"),),
        t_max=1,
    )
    res = run(
        prog,
        EngineConfig(t_max=1, persistent=True, volatile_predicates=frozenset({"act"})),
    )
    assert ("x", "act") not in nonbottom(res.history[1])
    assert nonbottom(res.history[1])[("x", "seen")] == "[1.0,1.0]"


def test_ipl_enforced_through_the_run():
    prog = Program(
        rules=(parse_rule("wake :: alive(X):[1,1] <-0 born(X):[1,1]"),),
        facts=(
            parse_fact("born(a):[1,1] @ [0,0]"),
            parse_fact("dead(z):[1,1] @ [0,0]"),  # declares the paired predicate
        ),
        ipl=(("alive", "dead"),),
        t_max=0,
    )
    res = run(prog, EngineConfig(t_max=0))
    assert res.status is RunStatus.CONVERGED
    rows = nonbottom(res.history[0])
    assert rows[("a", "alive")] == "[1.0,1.0]"
    assert rows[("a", "dead")] == "[0.0,0.0]"  # complement enforced eagerly
    assert rows[("z", "alive")] == "[0.0,0.0]"  # and for the fact side too
    partner = [e for e in res.trace if e.predicate == "dead" and e.subject == "a"]
    assert partner and partner[0].source == "wake"


def test_inject_fact_rejects_processed_times():
    eng = Engine(simple_program(), EngineConfig(t_max=4))
    eng.step_time()
    with pytest.raises(ValueError):
        eng.inject_fact(TemporalFact(Atom("a", ("y",)), TRUE, 0, 0))
