"""Independent reference implementations the optimized code is checked against.

The naive grounder enumerates the full cross-product of candidate
assignments per rule (candidates drawn from the predicate maps), filters
by annotation containment and thresholds, and never shares code with the
engine's grounding path.
"""

from __future__ import annotations

import itertools
import random

from latreason.intervals import BOTTOM, Interval, leq
from latreason.model import (
    Atom,
    AnnotatedLiteral,
    AnnConst,
    DEFAULT_THRESHOLD,
    Program,
    Rule,
    TemporalFact,
    Threshold,
    Var,
)
from latreason.intervals import AnnFunc, AnnVar, eval_annotation


def _clause_info(rule):
    out = []
    skolem_by_var = {sk.variable: sk for sk in rule.skolems}
    for i, (lit, th) in enumerate(rule.body):
        lit = lit.normalized()
        skolem = None
        for t in lit.atom.args:
            if isinstance(t, Var) and t in skolem_by_var:
                skolem = skolem_by_var[t]
        out.append((i + 1, lit.atom, lit.annotation.value, th, skolem))
    return out


def _pool(store, rule, var):
    """Union of predicate-map projections over plain clauses naming the var."""
    pool = set()
    for _i, atom, _bound, _th, skolem in _clause_info(rule):
        if skolem is not None:
            continue
        subjects = store.pred_map.get(atom.predicate, set())
        if len(atom.args) == 1:
            if atom.args[0] == var:
                pool |= {s for s in subjects if not isinstance(s, tuple)}
        else:
            for pos in range(2):
                if atom.args[pos] == var:
                    pool |= {s[pos] for s in subjects if isinstance(s, tuple)}
    return pool


def _skolem_value(store, atom, skolem, binding, constructors, ad_hoc):
    """Clause value under a binding when the clause names a constructed entity."""
    entity = constructors[skolem.constructor](tuple(binding[a] for a in skolem.args))
    if entity is None:
        return None, None
    if not ad_hoc and entity.name not in store.nodes:
        return None, None
    resolved = [
        (entity.name if t == skolem.variable else binding.get(t, t)) if isinstance(t, Var) else t
        for t in atom.args
    ]
    subject = resolved[0] if len(resolved) == 1 else tuple(resolved)
    entry = store.entries.get((subject, atom.predicate))
    if entry is not None:
        return entity, entry[0]
    if ad_hoc:
        if len(resolved) == 1:
            declared = entity.attr_value(atom.predicate)
        else:
            declared = entity.edge_value(resolved[0], resolved[1], atom.predicate)
        if declared is not None:
            return entity, declared
    return entity, BOTTOM


def _clause_rows(store, rule, atom, bound, skolem, constructors, ad_hoc):
    """(binding dict, value) rows over the clause's variables (+ skolem args)."""
    rows = []
    if skolem is not None:
        domains = [sorted(_pool(store, rule, a)) for a in skolem.args]
        for combo in itertools.product(*domains):
            binding = dict(zip(skolem.args, combo))
            entity, value = _skolem_value(store, atom, skolem, binding, constructors, ad_hoc)
            if entity is None:
                continue
            binding[skolem.variable] = entity.name
            rows.append((binding, value))
        return rows
    if len(atom.args) == 1:
        term = atom.args[0]
        if isinstance(term, Var):
            pool = sorted(s for s in store.pred_map.get(atom.predicate, ())
                          if not isinstance(s, tuple))
            for s in pool:
                rows.append(({term: s}, store.value(s, atom.predicate)))
        elif term in store.pred_map.get(atom.predicate, ()):
            rows.append(({}, store.value(term, atom.predicate)))
        return rows
    candidates = sorted(s for s in store.pred_map.get(atom.predicate, ())
                        if isinstance(s, tuple))
    for s in candidates:
        binding = {}
        ok = True
        for t, v in zip(atom.args, s):
            if isinstance(t, Var):
                if t in binding and binding[t] != v:
                    ok = False
                    break
                binding[t] = v
            elif t != v:
                ok = False
                break
        if ok:
            rows.append((binding, store.value(s, atom.predicate)))
    return rows


def naive_ground_rule(rule, store, constructors=None, ad_hoc=True):
    """Reference result: dict head_subject -> (Interval, set_static)."""
    constructors = constructors or {}
    info = _clause_info(rule)
    skolem_vars = rule.skolem_vars()
    variables = sorted(
        {v for _i, atom, _b, _t, sk in info for v in atom.variables() if v not in skolem_vars}
        | {v for _i, _a, _b, _t, sk in info if sk for v in sk.args}
        | {v for v in rule.head.atom.variables() if v not in skolem_vars},
        key=lambda v: v.name,
    )
    domains = [sorted(_pool(store, rule, v)) for v in variables]
    if any(not d for d in domains):
        return {}

    def satisfied(assign):
        for _i, atom, bound, _th, skolem in info:
            if skolem is not None:
                _e, value = _skolem_value(store, atom, skolem, assign, constructors, ad_hoc)
                if value is None or not leq(bound, value):
                    return False
                continue
            resolved = [assign[t] if isinstance(t, Var) else t for t in atom.args]
            subject = resolved[0] if len(resolved) == 1 else tuple(resolved)
            # clauses ground only over atoms known for their predicate
            if subject not in store.pred_map.get(atom.predicate, ()):
                return False
            if not leq(bound, store.value(subject, atom.predicate)):
                return False
        return True

    skolem_by_var = {sk.variable: sk for sk in rule.skolems}
    results = {}
    rows_cache = {}
    for combo in itertools.product(*domains):
        assign = dict(zip(variables, combo))
        if not satisfied(assign):
            continue
        resolved = []
        bad = False
        full = dict(assign)
        for t in rule.head.atom.args:
            if isinstance(t, Var) and t in skolem_by_var:
                sk = skolem_by_var[t]
                entity = constructors[sk.constructor](tuple(assign[a] for a in sk.args))
                if entity is None or (not ad_hoc and entity.name not in store.nodes):
                    bad = True
                    break
                resolved.append(entity.name)
                full[t] = entity.name
            elif isinstance(t, Var):
                resolved.append(assign[t])
            else:
                resolved.append(t)
        if bad:
            continue
        for sk in rule.skolems:
            entity = constructors[sk.constructor](tuple(assign[a] for a in sk.args))
            if entity is None or (not ad_hoc and entity.name not in store.nodes):
                bad = True
                break
            full[sk.variable] = entity.name
        if bad:
            continue
        subject = resolved[0] if len(resolved) == 1 else tuple(resolved)
        if subject in results:
            continue
        head_fixed = {
            v: full[v] for v in rule.head.atom.variables() if v in full
        }
        ok = True
        inputs = []
        for i, atom, bound, th, skolem in info:
            key = i
            if key not in rows_cache:
                rows_cache[key] = _clause_rows(
                    store, rule, atom, bound, skolem, constructors, ad_hoc
                )
            rows = rows_cache[key]
            relevant = set(atom.variables())
            if skolem is not None:
                relevant |= set(skolem.args)
            fixed = {v: c for v, c in head_fixed.items() if v in relevant}
            restricted = [
                (b, val) for b, val in rows
                if all(b.get(v, c) == c for v, c in fixed.items() if v in b)
            ]
            sat = [(b, val) for b, val in restricted if leq(bound, val)]
            if not th.check(len(sat), len(restricted)):
                ok = False
                break
            if sat:
                inputs.append(Interval(min(v.lower for _b, v in sat),
                                       max(v.upper for _b, v in sat)))
            else:
                inputs.append(bound)
        if not ok:
            continue
        if isinstance(rule.head.annotation, AnnConst):
            interval = rule.head.annotation.value
        else:
            interval = eval_annotation(rule.head.annotation, inputs)
        results[subject] = (interval, rule.set_static)
    return results


# ---------------------------------------------------------------------------
# Randomized inputs
# ---------------------------------------------------------------------------

PALETTE = [
    Interval(0.0, 1.0),
    Interval(1.0, 1.0),
    Interval(0.0, 0.0),
    Interval(0.5, 1.0),
    Interval(0.2, 0.7),
    Interval(0.0, 0.4),
    Interval(0.9, 1.0),
]

UP_PALETTE = [  # lower-bound-only intervals: sup can never be empty
    Interval(0.0, 1.0),
    Interval(0.2, 1.0),
    Interval(0.5, 1.0),
    Interval(0.8, 1.0),
    Interval(1.0, 1.0),
]


def random_store(rng: random.Random, n_constants=12, n_atoms=40):
    from latreason.store import InterpretationStore

    store = InterpretationStore()
    consts = [f"c{i}" for i in range(rng.randint(2, n_constants))]
    for c in consts:
        store.add_node(c)
    unary = [f"u{i}" for i in range(rng.randint(1, 4))]
    binary = [f"b{i}" for i in range(rng.randint(1, 4))]
    for _ in range(rng.randint(1, n_atoms)):
        if rng.random() < 0.5:
            store.update(rng.choice(consts), rng.choice(unary), rng.choice(PALETTE))
        else:
            edge = (rng.choice(consts), rng.choice(consts))
            store.update(edge, rng.choice(binary), rng.choice(PALETTE))
    return store, consts, unary, binary


def random_rule(rng: random.Random, unary, binary, name="r"):
    xs = [Var("X"), Var("Y"), Var("Z")]
    n_clauses = rng.randint(1, 3)
    body = []
    used_vars = []
    seen_atoms = set()
    for _ in range(n_clauses):
        if rng.random() < 0.55:
            v = rng.choice(xs[: rng.randint(1, 3)])
            atom = Atom(rng.choice(unary), (v,))
        else:
            v1, v2 = rng.sample(xs, 2) if rng.random() < 0.8 else (xs[0], xs[0])
            atom = Atom(rng.choice(binary), (v1, v2))
        if (atom, False) in seen_atoms:
            continue
        seen_atoms.add((atom, False))
        used_vars.extend(atom.variables())
        bound = rng.choice(PALETTE)
        roll = rng.random()
        if roll < 0.6:
            th = DEFAULT_THRESHOLD
        elif roll < 0.75:
            th = Threshold(">=", "count", rng.randint(1, 3))
        elif roll < 0.85:
            th = Threshold(">", "percent", rng.choice([0, 25, 50]))
        elif roll < 0.95:
            th = Threshold("<=", "count", rng.randint(1, 4))
        else:
            th = Threshold("=", "count", rng.randint(0, 2))
        body.append((AnnotatedLiteral(atom, AnnConst(bound)), th))
    if not body:
        body.append((AnnotatedLiteral(Atom(unary[0], (xs[0],)), AnnConst(PALETTE[0])),
                     DEFAULT_THRESHOLD))
        used_vars.append(xs[0])
    head_vars = sorted(set(used_vars), key=lambda v: v.name)
    if rng.random() < 0.5 or len(head_vars) == 1:
        head_atom = Atom("h", (rng.choice(head_vars),))
    else:
        head_atom = Atom("h", tuple(rng.sample(head_vars, 2)))
    if rng.random() < 0.7:
        annotation = AnnConst(rng.choice(PALETTE[:2] + PALETTE[3:]))
    else:
        fn = rng.choice(["min", "product", "average"])
        annotation = AnnFunc(fn, tuple(AnnVar(i + 1) for i in range(len(body))))
    return Rule(
        head=AnnotatedLiteral(head_atom, annotation),
        body=tuple(body),
        delay=rng.randint(0, 2),
        set_static=rng.random() < 0.1,
        name=name,
    )


def reference_run(program, persistent: bool):
    """Saturation-style reference evaluator for consistent programs.

    Deliberately structured unlike the engine: no phases, no per-pass
    buckets — per time point it just keeps applying every rule through the
    naive grounder until nothing changes, sup-merging as it goes.  Delayed
    heads accumulate (deduplicated) and sup-merge on arrival.  Valid for
    constant head annotations, where merge order cannot matter.
    """
    from latreason.store import InterpretationStore, UpdateOutcome

    rules = program.named_rules()
    store = InterpretationStore()
    for fact in program.facts:
        subject = fact.atom.subject()
        if isinstance(subject, tuple):
            store.add_edge(subject)
        else:
            store.add_node(subject)
    future: dict = {}
    history = []
    for t in range(program.t_max + 1):
        if t > 0:
            store.advance_time(persistent)
        for fact in program.facts:
            if fact.t_start <= t <= fact.t_end:
                store.update(fact.atom.subject(), fact.atom.predicate,
                             fact.annotation, static=fact.static)
        for subject, pred, iv, static in sorted(future.pop(t, set()), key=str):
            store.update(subject, pred, iv, static=static)
        changed = True
        while changed:
            changed = False
            for rule in rules:
                head_pred = rule.head.atom.predicate
                for subject, (iv, set_static) in naive_ground_rule(rule, store).items():
                    if rule.delay == 0:
                        out = store.update(subject, head_pred, iv, static=set_static)
                        changed = changed or out == UpdateOutcome.CHANGED
                    else:
                        target = t + rule.delay
                        if target <= program.t_max:
                            future.setdefault(target, set()).add(
                                (subject, head_pred, iv, set_static)
                            )
        history.append(store.dump_rows())
    return history


def random_consistent_program(rng: random.Random, max_rules=20, max_constants=50, t_max=None):
    """Programs whose annotations all have upper bound 1, so no contradiction
    (and hence no inconsistency) is expressible."""
    consts = [f"c{i}" for i in range(rng.randint(2, max_constants))]
    unary = [f"u{i}" for i in range(rng.randint(1, 3))]
    binary = [f"b{i}" for i in range(rng.randint(1, 2))]
    derived = [f"d{i}" for i in range(rng.randint(1, 3))]
    t_max = t_max if t_max is not None else rng.randint(0, 3)
    facts = []
    for _ in range(rng.randint(2, 25)):
        iv = rng.choice(UP_PALETTE[1:])
        t = rng.randint(0, t_max)
        t2 = min(t_max, t + rng.randint(0, 1))
        if rng.random() < 0.5:
            atom = Atom(rng.choice(unary), (rng.choice(consts),))
        else:
            atom = Atom(rng.choice(binary), (rng.choice(consts), rng.choice(consts)))
        facts.append(TemporalFact(atom, iv, t, t2, rng.random() < 0.15))
    xs = [Var("X"), Var("Y")]
    rules = []
    for ri in range(rng.randint(1, max_rules)):
        n_clauses = rng.randint(1, 2)
        body = []
        seen = set()
        used = []
        for _ in range(n_clauses):
            if rng.random() < 0.6:
                atom = Atom(rng.choice(unary + derived), (rng.choice(xs),))
            else:
                atom = Atom(rng.choice(binary), (xs[0], xs[1]))
            if (atom, False) in seen:
                continue
            seen.add((atom, False))
            used.extend(atom.variables())
            body.append(
                (AnnotatedLiteral(atom, AnnConst(rng.choice(UP_PALETTE))), DEFAULT_THRESHOLD)
            )
        if not body:
            continue
        head_var = rng.choice(sorted(set(used), key=lambda v: v.name))
        head = AnnotatedLiteral(
            Atom(rng.choice(derived), (head_var,)), AnnConst(rng.choice(UP_PALETTE[1:]))
        )
        rules.append(Rule(head=head, body=tuple(body), delay=rng.randint(0, 2),
                          name=f"rule_{ri}"))
    return Program(rules=tuple(rules), facts=tuple(facts), t_max=t_max)
