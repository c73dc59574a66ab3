import pytest

from latreason.intervals import BOTTOM, FALSE, TRUE, Interval
from latreason.model import Atom, AnnotatedLiteral, TemporalFact
from latreason.intervals import AnnConst
from latreason.store import InterpretationStore, UpdateOutcome, check_consistency


def ivl(a, b):
    return Interval(a, b)


def test_get_open_world_default():
    store = InterpretationStore()
    assert store.get(Atom("at", ("patrolCar", "locMid"))) == BOTTOM


def test_get_after_fact_and_negation_duality():
    store = InterpretationStore()
    store.update(("patrolCar", "locMid"), "at", TRUE)
    atom = Atom("at", ("patrolCar", "locMid"))
    assert store.get(atom) == TRUE
    assert store.get(AnnotatedLiteral(atom, AnnConst(TRUE), negated=True)) == FALSE


def test_check_consistency():
    assert check_consistency(TRUE, BOTTOM)
    assert not check_consistency(TRUE, FALSE)
    assert check_consistency(ivl(0.3, 0.8), ivl(0.5, 1.0))
    # brute-force overlap oracle on a small lattice of tenths
    grid = [i / 10 for i in range(11)]
    for al in grid:
        for au in grid:
            if al > au:
                continue
            for bl in grid:
                for bu in grid:
                    if bl > bu:
                        continue
                    want = max(al, bl) <= min(au, bu)
                    assert check_consistency(ivl(al, au), ivl(bl, bu)) == want


def test_update_outcomes():
    store = InterpretationStore()
    assert store.update("x", "b", TRUE) == UpdateOutcome.CHANGED
    assert store.value("x", "b") == TRUE
    assert store.update("x", "b", TRUE) == UpdateOutcome.UNCHANGED
    # tightening via sup
    store.update("y", "p", ivl(0.2, 0.9))
    assert store.update("y", "p", ivl(0.5, 1.0)) == UpdateOutcome.CHANGED
    assert store.value("y", "p") == ivl(0.5, 0.9)


def test_update_blocked_by_static():
    store = InterpretationStore()
    store.update("x", "speed", TRUE, static=True)
    assert store.update("x", "speed", FALSE) == UpdateOutcome.BLOCKED
    assert store.value("x", "speed") == TRUE


def test_inconsistency_resolution_quarantines():
    store = InterpretationStore()
    store.update("c", "p", TRUE)
    out = store.update("c", "p", FALSE)
    assert out == UpdateOutcome.INCONSISTENT
    assert store.value("c", "p") == BOTTOM
    assert store.is_static("c", "p")
    assert ("c", "p") in store.inconsistent_set
    # quarantined: nothing moves it again
    assert store.update("c", "p", TRUE) == UpdateOutcome.BLOCKED


def test_inconsistency_resolution_resets_ipl_partner():
    store = InterpretationStore(ipl=[("p", "q")])
    store.update("c", "q", TRUE)
    assert store.value("c", "p") == FALSE  # complement enforced eagerly
    out = store.update("c", "p", TRUE)  # contradicts the enforced complement
    assert out == UpdateOutcome.INCONSISTENT
    assert store.value("c", "p") == BOTTOM and store.is_static("c", "p")
    assert store.value("c", "q") == BOTTOM and store.is_static("c", "q")


def test_no_ipl_only_self_reset():
    store = InterpretationStore()
    store.update("c", "p", TRUE)
    store.update("c", "q", TRUE)
    store.update("c", "p", FALSE)
    assert store.value("c", "q") == TRUE  # untouched


def test_enforce_ipl_complement():
    store = InterpretationStore(ipl=[("alive", "dead")])
    store.update("a", "alive", TRUE)
    assert store.value("a", "dead") == FALSE
    # bottom maps to bottom: no materialization for an uninformative value
    store2 = InterpretationStore(ipl=[("alive", "dead")])
    store2.update("b", "alive", BOTTOM)
    assert store2.value("b", "dead") == BOTTOM


def test_enforce_ipl_idempotent():
    store = InterpretationStore(ipl=[("alive", "dead")])
    store.update("a", "alive", TRUE)
    before = dict(store.entries)
    store.enforce_ipl("a", "alive", source="again")
    assert store.entries == before


def test_ipl_against_static_partner_goes_inconsistent():
    store = InterpretationStore(ipl=[("alive", "dead")])
    # dead pinned true forces alive to [0,0] through the pair constraint
    store.update("a", "dead", TRUE, static=True)
    assert store.value("a", "alive") == FALSE
    # asserting alive=[1,1] now contradicts; both ends are quarantined
    out = store.update("a", "alive", TRUE)
    assert out == UpdateOutcome.INCONSISTENT
    assert store.value("a", "alive") == BOTTOM and store.is_static("a", "alive")
    assert store.value("a", "dead") == BOTTOM and store.is_static("a", "dead")


def test_advance_time_reset_semantics():
    store = InterpretationStore()
    store.update("x", "b", TRUE)
    store.update("x", "speed", TRUE, static=True)
    store.advance_time(persistent=False)
    assert store.value("x", "b") == BOTTOM
    assert store.value("x", "speed") == TRUE  # static survives
    assert store.now == 1

    store2 = InterpretationStore()
    store2.update("x", "b", TRUE)
    store2.advance_time(persistent=True)
    assert store2.value("x", "b") == TRUE


def test_advance_time_volatile_predicates():
    store = InterpretationStore()
    store.update("a", "moveDir", TRUE)
    store.update("a", "atLoc", TRUE)
    store.advance_time(persistent=True, volatile_predicates=frozenset({"moveDir"}))
    assert store.value("a", "moveDir") == BOTTOM
    assert store.value("a", "atLoc") == TRUE


def test_pending_facts_applied_on_their_day():
    store = InterpretationStore()
    store.add_pending(TemporalFact(Atom("a", ("x",)), TRUE, 1, 2))
    assert store.apply_facts_for(0) == 0
    store.advance_time(False)
    assert store.apply_facts_for(1) == 1
    assert store.value("x", "a") == TRUE


def test_memory_invariant_holds():
    store = InterpretationStore()
    store.update("x", "a", TRUE)
    store.update("y", "b", ivl(0.3, 0.6))
    store.update("y", "b", FALSE)  # quarantined as static bottom
    store.check_memory_invariant()
    store.advance_time(False)
    store.check_memory_invariant()


def test_pred_filtered_tracks_materialized():
    store = InterpretationStore()
    store.update("x", "a", TRUE)
    store.update("y", "a", ivl(0.5, 1.0))
    assert store.pred_filtered["a"] == {"x", "y"}
    store.advance_time(False)
    assert store.pred_filtered["a"] == set()
    assert store.pred_map["a"] == {"x", "y"}  # ever-annotated memory survives


def test_eps_change_detection():
    store = InterpretationStore()
    store.update("x", "a", ivl(0.5, 1.0))
    wiggle = ivl(0.5 + 1e-12, 1.0)
    assert store.update("x", "a", wiggle) == UpdateOutcome.UNCHANGED
