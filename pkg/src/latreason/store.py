"""The world state: current-time annotations for ground atoms.

Only atoms whose annotation differs from the bottom element [0,1] are held
in memory (open world); history lives in the trace.  The store also keeps
the predicate indices the grounder seeds candidates from, the list of
pending facts, and the set of atoms found inconsistent.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from typing import Callable, Iterable, Optional

from .intervals import BOTTOM, EPS, InconsistentSup, Interval, negate, sup
from .model import AnnotatedLiteral, Subject, TemporalFact
from .tracing import FACT_SOURCE, INCONSISTENCY_SOURCE

__all__ = ["UpdateOutcome", "InterpretationStore", "check_consistency"]


class UpdateOutcome(enum.Enum):
    CHANGED = "changed"
    UNCHANGED = "unchanged"
    BLOCKED = "blocked"
    INCONSISTENT = "inconsistent"


def check_consistency(candidate: Interval, current: Interval) -> bool:
    """True iff the two intervals have a common refinement."""
    return max(candidate.lower, current.lower) <= min(candidate.upper, current.upper)


class InterpretationStore:
    """Nested-dictionary interpretation for the current time point.

    ``inconsistency_mode`` decides what an update that contradicts the
    stored value does:

    - ``resolve``  (default): the atom is reset to [0,1], pinned static, and
      remembered in the inconsistent set; IPL partners are reset with it.
    - ``override``: the new value replaces the old one.  This turns the
      store into a destructive-update simulator, which is what grid-world
      style scenarios with on/off flags under persistence want.
    - ``abort``: nothing is modified; the caller sees INCONSISTENT and stops.
    """

    def __init__(
        self,
        ipl: Iterable = (),
        eps: float = EPS,
        inconsistency_mode: str = "resolve",
    ):
        if inconsistency_mode not in ("resolve", "override", "abort"):
            raise ValueError(f"unknown inconsistency mode {inconsistency_mode!r}")
        self.eps = eps
        self.inconsistency_mode = inconsistency_mode
        self.now = 0
        self.entries: dict = {}  # (subject, pred) -> (Interval, static)
        self.pending: dict = defaultdict(list)  # t -> [TemporalFact]
        self.inconsistent_set: set = set()  # Algorithm's E
        self.pred_map: dict = defaultdict(set)  # pred -> subjects ever annotated
        self.pred_filtered: dict = defaultdict(set)  # pred -> subjects currently materialized
        self.adjacency: dict = defaultdict(lambda: (defaultdict(set), defaultdict(set)))
        self.nodes: set = set()
        self.edges: set = set()
        self.node_neighbors: dict = defaultdict(set)  # Nbr over the whole graph
        self.node_rneighbors: dict = defaultdict(set)  # Rnbr
        self.created_at: dict = {}  # subject -> time it was skolemized into existence
        self.ever: set = set()  # (subject, pred) ever materialized
        self.ever_by_pred: dict = defaultdict(int)
        self._ipl_partners: dict = defaultdict(set)
        for p, q in ipl:
            self._ipl_partners[p].add(q)
            self._ipl_partners[q].add(p)
        # Called as recorder(subject, pred, old, new, source, grounding).
        self.recorder: Optional[Callable] = None
        self._in_ipl: set = set()

    # -- universe ----------------------------------------------------------

    def add_node(self, node: str) -> None:
        self.nodes.add(node)

    def add_edge(self, edge: tuple) -> None:
        src, tgt = edge
        self.nodes.add(src)
        self.nodes.add(tgt)
        self.edges.add(edge)
        self.node_neighbors[src].add(tgt)
        self.node_rneighbors[tgt].add(src)

    def has_subject(self, subject: Subject) -> bool:
        if isinstance(subject, tuple):
            return subject in self.edges
        return subject in self.nodes

    # -- reads ---------------------------------------------------------------

    def value(self, subject: Subject, pred: str) -> Interval:
        entry = self.entries.get((subject, pred))
        return entry[0] if entry is not None else BOTTOM

    def is_static(self, subject: Subject, pred: str) -> bool:
        entry = self.entries.get((subject, pred))
        return entry is not None and entry[1]

    def get(self, literal) -> Interval:
        """Value of a ground atom or annotated literal; negation via duality."""
        if isinstance(literal, AnnotatedLiteral):
            atom, negated = literal.atom, literal.negated
        else:
            atom, negated = literal, False
        v = self.value(atom.subject(), atom.predicate)
        return negate(v) if negated else v

    def materialized_count(self) -> int:
        return sum(1 for iv, _static in self.entries.values() if not iv.is_bottom)

    def dump_rows(self) -> list:
        """Sorted (subject, pred, Interval, static) rows for the current time."""
        rows = []
        for (subject, pred), (iv, static) in self.entries.items():
            if not iv.is_bottom:
                rows.append((subject, pred, iv, static))
        rows.sort(key=lambda r: (str(r[0]), r[1]))
        return rows

    # -- writes ----------------------------------------------------------------

    def _record(self, subject, pred, old, new, source, grounding=None) -> None:
        if self.recorder is not None:
            self.recorder(subject, pred, old, new, source, grounding)

    def _materialize(self, subject: Subject, pred: str, iv: Interval, static: bool) -> None:
        key = (subject, pred)
        self.entries[key] = (iv, static)
        self.pred_map[pred].add(subject)
        if isinstance(subject, tuple):
            fwd, rev = self.adjacency[pred]
            fwd[subject[0]].add(subject[1])
            rev[subject[1]].add(subject[0])
            self.add_edge(subject)
        else:
            self.add_node(subject)
        if iv.is_bottom:
            self.pred_filtered[pred].discard(subject)
        else:
            self.pred_filtered[pred].add(subject)
            if key not in self.ever:
                self.ever.add(key)
                self.ever_by_pred[pred] += 1

    def update(
        self,
        subject: Subject,
        pred: str,
        value: Interval,
        *,
        static: bool = False,
        source: str = FACT_SOURCE,
        grounding=None,
    ) -> UpdateOutcome:
        """Merge a proposed annotation into the store.

        The new value is the supremum of the current and proposed values;
        contradictions take the inconsistency path configured for the store.
        Static entries never change.
        """
        key = (subject, pred)
        entry = self.entries.get(key)
        current, cur_static = entry if entry is not None else (BOTTOM, False)
        if cur_static:
            return UpdateOutcome.BLOCKED
        merged = sup([current, value])
        if isinstance(merged, InconsistentSup):
            if self.inconsistency_mode == "abort":
                self.inconsistent_set.add(key)
                return UpdateOutcome.INCONSISTENT
            if self.inconsistency_mode == "resolve":
                self.resolve_inconsistency(subject, pred)
                return UpdateOutcome.INCONSISTENT
            # override: the proposal replaces the stored value
            self._materialize(subject, pred, value, static)
            self._record(subject, pred, current, value, source, grounding)
            self.enforce_ipl(subject, pred, source)
            return UpdateOutcome.CHANGED
        if merged.approx_eq(current, self.eps):
            if static and entry is not None:
                self.entries[key] = (current, True)
            elif static:
                self._materialize(subject, pred, merged, True)
            return UpdateOutcome.UNCHANGED
        self._materialize(subject, pred, merged, static)
        self._record(subject, pred, current, merged, source, grounding)
        self.enforce_ipl(subject, pred, source)
        return UpdateOutcome.CHANGED

    def resolve_inconsistency(self, subject: Subject, pred: str) -> None:
        """Quarantine a contradictory atom: reset to [0,1] and pin it static.

        IPL partners at the same subject are reset alongside it, so the
        complementary-bounds requirement cannot keep firing.
        """
        self._reset_static_bottom(subject, pred)
        for partner in sorted(self._ipl_partners.get(pred, ())):
            self._reset_static_bottom(subject, partner)

    def _reset_static_bottom(self, subject: Subject, pred: str) -> None:
        key = (subject, pred)
        entry = self.entries.get(key)
        current = entry[0] if entry is not None else BOTTOM
        self.entries[key] = (BOTTOM, True)
        self.pred_map[pred].add(subject)
        self.pred_filtered[pred].discard(subject)
        self.inconsistent_set.add(key)
        if not current.approx_eq(BOTTOM, self.eps):
            self._record(subject, pred, current, BOTTOM, INCONSISTENCY_SOURCE)

    def enforce_ipl(self, subject: Subject, pred: str, source: str) -> list:
        """Keep IPL partners complementary to a freshly changed atom.

        Each partner at the same subject is proposed the negation of the
        changed value; proposals run through :meth:`update`, so they may in
        turn be blocked, inconsistent, or cascade.  Idempotent when re-run
        with no intervening change.
        """
        partners = self._ipl_partners.get(pred)
        if not partners:
            return []
        key = (subject, pred)
        if key in self._in_ipl:
            return []
        value = self.value(subject, pred)
        outcomes = []
        self._in_ipl.add(key)
        try:
            for partner in sorted(partners):
                outcomes.append(
                    self.update(subject, partner, negate(value), source=source)
                )
        finally:
            self._in_ipl.discard(key)
        return outcomes

    # -- time ------------------------------------------------------------------

    def add_pending(self, fact: TemporalFact) -> None:
        for t in range(fact.t_start, fact.t_end + 1):
            self.pending[t].append(fact)

    def advance_time(self, persistent: bool, volatile_predicates: frozenset = frozenset()) -> None:
        """Move to the next time point, resetting annotations as configured.

        Non-persistent runs return every non-static entry to the bottom of
        the lattice; persistent runs keep values but still clear the
        declared volatile predicates (one-shot inputs such as actions).
        Resets are silent: the trace records only fact and rule effects.
        """
        self.now += 1
        if persistent and not volatile_predicates:
            return
        remove = []
        for (subject, pred), (iv, static) in self.entries.items():
            if static:
                continue
            if not persistent or pred in volatile_predicates:
                remove.append((subject, pred))
        for subject, pred in remove:
            del self.entries[(subject, pred)]
            self.pred_filtered[pred].discard(subject)

    def apply_facts_for(self, t: int) -> int:
        """Apply pending facts scheduled at t (the Γ=0 phase); returns #changed."""
        changed = 0
        for fact in self.pending.get(t, ()):
            outcome = self.update(
                fact.atom.subject(),
                fact.atom.predicate,
                fact.annotation,
                static=fact.static,
                source=FACT_SOURCE,
            )
            if outcome == UpdateOutcome.CHANGED:
                changed += 1
        return changed

    # -- invariants ---------------------------------------------------------------

    def check_memory_invariant(self) -> None:
        """Materialization discipline: stored entries are non-bottom, except
        inconsistency quarantines (bottom pinned static); pred_filtered mirrors
        exactly the non-bottom entries."""
        filtered = {
            (s, p) for p, subs in self.pred_filtered.items() for s in subs
        }
        stored_nonbottom = {
            key for key, (iv, _static) in self.entries.items() if not iv.is_bottom
        }
        if filtered != stored_nonbottom:
            raise AssertionError("pred_filtered out of sync with materialized entries")
        for key, (iv, static) in self.entries.items():
            if iv.is_bottom and not static:
                raise AssertionError(f"bottom-valued entry stored for {key}")
