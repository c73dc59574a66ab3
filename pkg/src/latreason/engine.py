"""The main loop: per-timestep fixpoint applications to convergence.

Each time point runs the same cycle: reset annotations as configured,
apply the facts due now (the Γ=0 phase), then apply the fixpoint operator
repeatedly until nothing changes.  Every application grounds all rules
against the pre-step state (so parallel and serial execution agree),
applies immediate heads in this step's reduction, and schedules delayed
heads for their target time point.  Convergence, inconsistency detection,
and the per-step growth bound are all checked as the loop runs.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

from .grounding import ground_rule
from .intervals import BOTTOM, InconsistentSup, Interval, leq, negate, sup
from .model import Atom, Program, Subject, validate
from .store import InterpretationStore, UpdateOutcome
from .tracing import TraceEntry, TraceLog

__all__ = [
    "EngineConfig",
    "RunStatus",
    "StepStats",
    "RunResult",
    "Engine",
    "run",
    "compute_growth_bound",
    "check_entailment",
    "EntailmentQueryError",
]

THREADS_ENV = "LATREASON_THREADS"


@dataclass(frozen=True)
class EngineConfig:
    t_max: int = 0
    persistent: bool = False
    static_graph_facts: bool = False
    ad_hoc_grounding: bool = True  # skolemized, on-demand entity creation
    parallel: bool = False
    workers: Optional[int] = None
    atom_trace: bool = False
    verbose: bool = False
    max_fp_iterations: int = 100
    abort_on_inconsistency: bool = False
    inconsistency_mode: str = "resolve"  # resolve | override | abort
    # Round annotations to this many decimals; quantizes the lattice so the
    # finite convergence cap becomes computable and is then enforced.
    quantize_decimals: Optional[int] = None
    # Predicates reset to bottom at every time step even under persistence
    # (one-shot inputs such as injected actions).
    volatile_predicates: frozenset = frozenset()

    def __post_init__(self):
        if self.max_fp_iterations < 1:
            raise ValueError("max_fp_iterations must be >= 1")

    def effective_mode(self) -> str:
        return "abort" if self.abort_on_inconsistency else self.inconsistency_mode

    def worker_count(self) -> int:
        if not self.parallel:
            return 1
        if self.workers is not None:
            return max(1, self.workers)
        env = os.environ.get(THREADS_ENV)
        if env:
            return max(1, int(env))
        return min(8, os.cpu_count() or 1)


class RunStatus(Enum):
    CONVERGED = "converged"
    INCONSISTENT = "inconsistent"
    CAP_EXCEEDED = "cap_exceeded"


@dataclass(frozen=True)
class StepStats:
    """One fixpoint application: materialization growth and its bound."""

    step: int  # global Γ application counter, 1-based
    t: int
    fp_step: int
    per_pred: dict  # predicate -> atoms ever materialized, after this step
    delta_total: int  # atoms newly materialized by this application
    bound: int  # growth bound from the pre-step counts
    changed: int  # store updates applied


@dataclass
class RunResult:
    program: Program
    config: EngineConfig
    status: RunStatus
    store: InterpretationStore
    trace: TraceLog
    stats: list
    history: list  # per t: sorted (subject, pred, Interval, static) rows
    fp_counts: list  # per t: number of Γ applications run

    def dump_tsv(self) -> str:
        lines = ["time\tentity\tpredicate\tlower\tupper\tstatic"]
        from .tracing import format_subject

        for t, rows in enumerate(self.history):
            for subject, pred, iv, static in rows:
                lines.append(
                    f"{t}\t{format_subject(subject)}\t{pred}\t{iv.lower!r}\t{iv.upper!r}"
                    f"\t{str(static).lower()}"
                )
        return "\n".join(lines) + "\n"

    def stats_csv(self) -> str:
        lines = ["step,predicate,count,delta_total,theorem4_bound"]
        for s in self.stats:
            preds = sorted(s.per_pred) or []
            lines.append(f"{s.step},_total,{sum(s.per_pred.values())},{s.delta_total},{s.bound}")
            for p in preds:
                lines.append(f"{s.step},{p},{s.per_pred[p]},{s.delta_total},{s.bound}")
        return "\n".join(lines) + "\n"


def compute_growth_bound(program: Program, prev_counts: Mapping[str, int]) -> int:
    """Growth bound for one application: sum over rules of the product of the
    previous per-predicate counts across that rule's body clauses."""
    total = 0
    for rule in program.rules:
        prod = 1
        for lit, _th in rule.body:
            prod *= prev_counts.get(lit.atom.predicate, 0)
            if prod == 0:
                break
        total += prod
    return total


class EntailmentQueryError(RuntimeError):
    pass


def check_entailment(result: RunResult, atom: Atom, mu: Interval, t: int, negated: bool = False) -> bool:
    """Does the least fixpoint satisfy ``atom:mu`` at time t?"""
    if result.status is not RunStatus.CONVERGED:
        raise EntailmentQueryError(f"entailment queried on a {result.status.value} run")
    if not (0 <= t < len(result.history)):
        raise EntailmentQueryError(f"time {t} outside the computed range")
    value = BOTTOM
    subject = atom.subject()
    for s, p, iv, _static in result.history[t]:
        if s == subject and p == atom.predicate:
            value = iv
            break
    if negated:
        value = negate(value)
    return leq(mu, value)


@dataclass(frozen=True)
class _Proposal:
    rule_index: int
    rule_name: str
    grounding_key: tuple
    subject: Subject
    pred: str
    interval: Interval
    static: bool
    grounding: Optional[tuple]
    constructions: tuple

    def order_key(self) -> tuple:
        return (self.rule_index, self.grounding_key, str(self.subject), self.pred)


class Engine:
    """Incremental runner: one fully converged time point per step_time()."""

    def __init__(
        self,
        program: Program,
        config: EngineConfig,
        constructors: Optional[Mapping[str, Callable]] = None,
    ):
        diags = validate(program)
        if diags:
            raise ValueError("invalid program: " + "; ".join(str(d) for d in diags))
        self.program = program
        self.config = config
        self.constructors = dict(constructors or {})
        self.rules = program.named_rules()
        self.store = InterpretationStore(
            ipl=program.ipl, inconsistency_mode=config.effective_mode()
        )
        self.trace = TraceLog()
        self.stats: list = []
        self.history: list = []
        self.fp_counts: list = []
        self.delayed: dict = {}  # t -> {dedupe key: _Proposal}
        self.current_t = -1
        self.global_step = 0
        self.cap_exceeded = False
        self.inconsistent_abort = False
        self._fp = 0
        for node in program.nodes:
            self.store.add_node(node)
        for edge in program.edges:
            self.store.add_edge(edge)
        for fact in program.facts:
            self.store.add_pending(fact)
            subject = fact.atom.subject()
            if isinstance(subject, tuple):
                self.store.add_edge(subject)
            else:
                self.store.add_node(subject)
        self.store.recorder = self._record

    # -- trace plumbing -----------------------------------------------------

    def _record(self, subject, pred, old, new, source, grounding) -> None:
        self.trace.record(
            TraceEntry(
                t=self.store.now,
                fp_step=self._fp,
                subject=subject,
                predicate=pred,
                old=old,
                new=new,
                source=source,
                grounding=grounding if self.config.atom_trace else None,
            )
        )

    # -- fact injection (simulation use) ------------------------------------

    def inject_fact(self, fact) -> None:
        """Queue a fact for a not-yet-processed time point."""
        if fact.t_start <= self.current_t:
            raise ValueError(
                f"cannot inject at t={fact.t_start}; time {self.current_t} already processed"
            )
        self.store.add_pending(fact)
        subject = fact.atom.subject()
        if isinstance(subject, tuple):
            self.store.add_edge(subject)
        else:
            self.store.add_node(subject)

    # -- the per-time-point cycle --------------------------------------------

    def step_time(self) -> int:
        """Process the next time point to convergence; returns it.

        Each cycle applies the entries due now (delayed heads at the first
        pass, cascaded immediate heads afterwards) and then grounds every
        rule against the settled state, scheduling what it derives.  The
        loop stops once an apply pass changes nothing, i.e. one further
        application of the operator would be a no-op.
        """
        t = self.current_t + 1
        if t > self.config.t_max:
            raise ValueError(f"advancing past t_max={self.config.t_max}")
        if t > 0:
            self.store.advance_time(
                self.config.persistent, self.config.volatile_predicates
            )
        else:
            self.store.now = 0
        self._fp = 0
        self.store.apply_facts_for(t)
        if self.inconsistent_abort:
            self._finish_time(t, 0)
            return t
        cap = self._iteration_cap()
        due = self.delayed.pop(t, None)
        incoming = sorted(due.values(), key=_Proposal.order_key) if due else []
        gamma_passes = 0
        k = 0
        while True:
            k += 1
            self._fp = k
            changed = self._apply_phase(t, k, incoming)
            if self.inconsistent_abort:
                break
            if k >= 2 and changed == 0:
                break
            if gamma_passes >= cap:
                self.cap_exceeded = True
                break
            gamma_passes += 1
            incoming = self._ground_phase(t)
        self._finish_time(t, gamma_passes)
        return t

    def _atom_counts(self) -> dict:
        """Ground atoms known per predicate (the predicate-map contents)."""
        return {p: len(subs) for p, subs in self.store.pred_map.items() if subs}

    def _apply_phase(self, t: int, fp: int, proposals: list) -> int:
        """Merge one pass of proposals; records growth stats against the
        per-application bound computed from the pre-apply counts."""
        if not proposals:
            return 0
        pre_counts = self._atom_counts()
        pre_total = sum(pre_counts.values())
        bound = compute_growth_bound(self.program, pre_counts)
        changed = self._reduce(proposals)
        post_counts = self._atom_counts()
        self.global_step += 1
        self.stats.append(
            StepStats(
                step=self.global_step,
                t=t,
                fp_step=fp,
                per_pred=post_counts,
                delta_total=sum(post_counts.values()) - pre_total,
                bound=bound,
                changed=changed,
            )
        )
        return changed

    def _ground_phase(self, t: int) -> list:
        """Ground all rules on the settled store; returns the immediate
        proposals for the next apply pass and schedules delayed heads."""
        out: list = []
        for inst in self._ground_all():
            prop = _Proposal(
                rule_index=inst.rule_index,
                rule_name=inst.rule_name,
                grounding_key=inst.grounding or (str(inst.head_subject),),
                subject=inst.head_subject,
                pred=inst.head_pred,
                interval=self._quantize(inst.interval),
                static=inst.set_static,
                grounding=inst.grounding,
                constructions=inst.constructions,
            )
            if inst.delay == 0:
                out.append(prop)
            else:
                target = t + inst.delay
                if target <= self.config.t_max:
                    bucket = self.delayed.setdefault(target, {})
                    bucket[
                        (prop.rule_index, prop.grounding_key, str(prop.subject), prop.pred)
                    ] = prop
        return out

    def _finish_time(self, t: int, fp: int) -> None:
        self.history.append(self.store.dump_rows())
        self.fp_counts.append(fp)
        self.current_t = t
        if self.config.verbose:
            print(
                f"[t={t}] {fp} fixpoint application(s), "
                f"{self.store.materialized_count()} materialized atoms"
            )

    def _iteration_cap(self) -> int:
        if self.config.quantize_decimals is None:
            return self.config.max_fp_iterations
        # Quantized lattice: each bound moves in steps of 10^-d, so a chain
        # from [0,1] upward has at most 2*10^d + 1 values; with |A| known
        # atoms that caps the number of changing applications per time point.
        height = 2 * (10 ** self.config.quantize_decimals) + 1
        atoms = max(
            1, sum(len(subs) for subs in self.store.pred_map.values())
        )
        return height * atoms + 1

    def _quantize(self, iv: Interval) -> Interval:
        d = self.config.quantize_decimals
        if d is None:
            return iv
        return Interval(round(iv.lower, d), round(iv.upper, d))

    def _ground_all(self) -> list:
        workers = self.config.worker_count()
        indexed = list(enumerate(self.rules))

        def work(pair):
            idx, rule = pair
            return ground_rule(
                rule,
                self.store,
                constructors=self.constructors,
                ad_hoc=self.config.ad_hoc_grounding,
                rule_index=idx,
                atom_trace=self.config.atom_trace,
            )

        if workers <= 1 or len(indexed) <= 1:
            results = [work(p) for p in indexed]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(work, indexed))
        out: list = []
        for instances in results:
            out.extend(instances)
        return out

    def _reduce(self, proposals: Sequence) -> int:
        """Merge proposals into the store, deterministically.

        Proposals are grouped per atom in arrival order (delayed heads
        before this step's immediate heads, then rule index, then grounding
        order).  A mutually consistent group folds into a single supremum
        update; groups containing a contradiction are applied one by one so
        the configured inconsistency handling sees each conflicting value.
        """
        groups: dict = {}
        order: list = []
        for prop in proposals:
            key = (prop.subject, prop.pred)
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(prop)
        changed = 0
        for key in order:
            group = groups[key]
            self._materialize_constructions(group)
            subject, pred = key
            current = self.store.value(subject, pred)
            folded = sup([current] + [p.interval for p in group])
            if isinstance(folded, InconsistentSup):
                for prop in group:
                    outcome = self._apply_one(prop)
                    if outcome == UpdateOutcome.CHANGED:
                        changed += 1
                continue
            running = current
            attribution = None
            any_static = False
            for prop in group:
                merged = sup([running, prop.interval])
                assert isinstance(merged, Interval)
                if not merged.approx_eq(running, self.store.eps):
                    attribution = prop
                    running = merged
                any_static = any_static or prop.static
            winner = attribution or group[0]
            outcome = self.store.update(
                subject,
                pred,
                running,
                static=any_static,
                source=winner.rule_name,
                grounding=winner.grounding,
            )
            if outcome == UpdateOutcome.CHANGED:
                changed += 1
            elif outcome == UpdateOutcome.INCONSISTENT and self.config.effective_mode() == "abort":
                self.inconsistent_abort = True
                return changed
        return changed

    def _apply_one(self, prop: "_Proposal") -> UpdateOutcome:
        outcome = self.store.update(
            prop.subject,
            prop.pred,
            prop.interval,
            static=prop.static,
            source=prop.rule_name,
            grounding=prop.grounding,
        )
        if outcome == UpdateOutcome.INCONSISTENT and self.config.effective_mode() == "abort":
            self.inconsistent_abort = True
        return outcome

    def _materialize_constructions(self, group: Sequence) -> None:
        """Create skolemized entities and assert their birth annotations."""
        for prop in group:
            for entity in prop.constructions:
                is_new = entity.name not in self.store.nodes
                if is_new and not self.config.ad_hoc_grounding:
                    continue
                if is_new:
                    self.store.add_node(entity.name)
                    self.store.created_at[entity.name] = self.store.now
                for p, iv in entity.attrs:
                    self.store.update(
                        entity.name, p, iv, static=True, source=prop.rule_name
                    )
                for src, tgt, p, iv in entity.edges:
                    edge = (src, tgt)
                    if edge not in self.store.edges:
                        self.store.add_edge(edge)
                        self.store.created_at.setdefault(edge, self.store.now)
                    self.store.update(edge, p, iv, static=True, source=prop.rule_name)
            subject = prop.subject
            if isinstance(subject, tuple):
                if subject not in self.store.edges:
                    self.store.add_edge(subject)
                    self.store.created_at.setdefault(subject, self.store.now)
            elif subject not in self.store.nodes:
                self.store.add_node(subject)
                self.store.created_at.setdefault(subject, self.store.now)

    # -- whole-run convenience ------------------------------------------------

    def run(self) -> RunResult:
        started = time.time()
        while self.current_t < self.config.t_max:
            self.step_time()
            if self.inconsistent_abort:
                break
        if self.inconsistent_abort:
            status = RunStatus.INCONSISTENT
        elif self.cap_exceeded:
            status = RunStatus.CAP_EXCEEDED
        else:
            # Under "resolve", contradictions are quarantined (and listed in
            # the store's inconsistent set) rather than fatal.
            status = RunStatus.CONVERGED
        if self.config.verbose:
            print(f"run finished: {status.value} in {time.time() - started:.3f}s")
        return RunResult(
            program=self.program,
            config=self.config,
            status=status,
            store=self.store,
            trace=self.trace,
            stats=self.stats,
            history=self.history,
            fp_counts=self.fp_counts,
        )


def run(
    program: Program,
    config: EngineConfig,
    constructors: Optional[Mapping[str, Callable]] = None,
) -> RunResult:
    return Engine(program, config, constructors).run()
