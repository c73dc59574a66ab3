"""Grounding a non-ground rule against the current store.

The optimized path follows the engine's grounding algorithm: body clauses
are reordered so unary clauses come first, candidate sets are seeded from
the predicate maps, each clause filters by annotation containment, counting
thresholds abort early when they can no longer be met, and refinements are
propagated along the variable dependency graph.  A final backtracking join
over the pruned candidate sets makes the result exact; pruning only cuts
the search space.

Rules may declare skolem bindings ``V = ctor(A, ...)``: when grounding on
demand is enabled, ``V`` names an entity the constructor builds from the
bound arguments, complete with the attribute and edge annotations the fully
grounded universe would have carried for it.  Clauses that mention a skolem
variable are evaluated against those declared attributes until the entity
materializes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .intervals import BOTTOM, AnnConst, Interval, eval_annotation, leq
from .model import DEFAULT_THRESHOLD, Rule, SkolemBinding, Subject, Var
from .store import InterpretationStore

__all__ = [
    "ConstructedEntity",
    "ApplicableInstance",
    "GroundingError",
    "DependencyGraph",
    "ground_rule",
    "constructor_from_spec",
    "template_constructor",
    "map_constructor",
    "replace_constructor",
    "grid_constructor",
]

Constructor = Callable[[tuple], Optional["ConstructedEntity"]]


class GroundingError(ValueError):
    pass


@dataclass(frozen=True)
class ConstructedEntity:
    """A to-be-created constant plus the annotations it is born with.

    ``attrs`` are unary facts on the new node; ``edges`` are binary facts
    ``(source, target, predicate, value)`` linking it into the graph.  Both
    are asserted (static) when the entity materializes, so that guard
    clauses see the same world a pre-grounded universe would present.
    """

    name: str
    attrs: tuple = ()  # ((pred, Interval), ...)
    edges: tuple = ()  # ((source, target, pred, Interval), ...)

    def attr_value(self, pred: str) -> Optional[Interval]:
        for p, iv in self.attrs:
            if p == pred:
                return iv
        return None

    def edge_value(self, source: str, target: str, pred: str) -> Optional[Interval]:
        for s, t, p, iv in self.edges:
            if s == source and t == target and p == pred:
                return iv
        return None


@dataclass(frozen=True)
class ApplicableInstance:
    """One firing of a rule: a head grounding with its computed annotation."""

    rule_index: int
    rule_name: str
    delay: int
    head_subject: Subject
    head_pred: str
    interval: Interval
    set_static: bool
    grounding: Optional[tuple] = None  # ((var name, constant), ...)
    constructions: tuple = ()  # ConstructedEntity values to materialize on application

    def sort_key(self) -> tuple:
        g = self.grounding or ()
        return (self.rule_index, tuple(g), str(self.head_subject), self.head_pred)


class DependencyGraph:
    """Variable co-occurrence links from binary body clauses."""

    def __init__(self):
        self.links: dict = {}

    def add(self, a: Var, b: Var) -> None:
        self.links.setdefault(a, set()).add(b)
        self.links.setdefault(b, set()).add(a)

    def neighbors(self, v: Var) -> set:
        return self.links.get(v, set())


@dataclass
class _Clause:
    index: int  # original body position (annotation variables are 1-based on this)
    pred: str
    terms: tuple
    bound: Interval
    threshold: object
    skolem: Optional[SkolemBinding] = None  # set when the clause mentions a skolem var

    @property
    def arity(self) -> int:
        return len(self.terms)

    def variables(self) -> tuple:
        return tuple(t for t in self.terms if isinstance(t, Var))


def _clauses_of(rule: Rule, skolems: tuple) -> list:
    skolem_by_var = {sk.variable: sk for sk in skolems}
    out = []
    for i, (lit, th) in enumerate(rule.body):
        lit = lit.normalized()
        if not isinstance(lit.annotation, AnnConst):
            raise GroundingError(f"rule {rule.name}: body clause {i + 1} is not a constant interval")
        skolem = None
        for t in lit.atom.args:
            if isinstance(t, Var) and t in skolem_by_var:
                if skolem is not None and skolem_by_var[t] is not skolem:
                    raise GroundingError(
                        f"rule {rule.name}: clause {i + 1} mentions two skolem variables"
                    )
                skolem = skolem_by_var[t]
        if skolem is not None:
            allowed = set(skolem.args) | {skolem.variable}
            extra = set(lit.atom.variables()) - allowed
            if extra:
                raise GroundingError(
                    f"rule {rule.name}: clause {i + 1} mixes skolem variable "
                    f"{skolem.variable} with unrelated variables {sorted(v.name for v in extra)}"
                )
        out.append(_Clause(i + 1, lit.atom.predicate, lit.atom.args, lit.annotation.value, th, skolem))
    return out


def _seed_unary(store: InterpretationStore, pred: str, bound: Interval) -> set:
    base = store.pred_map.get(pred, set())
    if bound.is_bottom:
        return {s for s in base if not isinstance(s, tuple)}
    filtered = store.pred_filtered.get(pred, set())
    return {s for s in filtered if not isinstance(s, tuple)}


def _seed_edges(store: InterpretationStore, pred: str, bound: Interval) -> set:
    base = store.pred_map.get(pred, set())
    if not bound.is_bottom:
        base = store.pred_filtered.get(pred, set())
    return {s for s in base if isinstance(s, tuple)}


def _satisfies(store: InterpretationStore, subject: Subject, pred: str, bound: Interval) -> bool:
    """Clause satisfaction over known atoms.

    Candidates come from the predicate map: an atom never mentioned for the
    clause's predicate is not enumerated, even against the bottom bound.
    This is the open-world pruning that also keeps the per-step growth
    bound (a product of per-predicate atom counts) an actual bound.
    """
    if subject not in store.pred_map.get(pred, ()):
        return False
    return leq(bound, store.value(subject, pred))


class _Grounder:
    def __init__(
        self,
        rule: Rule,
        store: InterpretationStore,
        constructors: Mapping[str, Constructor],
        ad_hoc: bool,
        rule_index: int,
        atom_trace: bool,
    ):
        self.rule = rule
        self.store = store
        self.constructors = constructors or {}
        self.ad_hoc = ad_hoc
        self.rule_index = rule_index
        self.atom_trace = atom_trace
        # Without on-demand grounding, a skolem binding whose constructor is
        # not supplied degrades gracefully: its clauses match the
        # pre-grounded universe like any others.  A binding WITH a registered
        # constructor still resolves names through it (creation stays off).
        self.skolems = tuple(
            sk for sk in rule.skolems if ad_hoc or sk.constructor in self.constructors
        )
        self.clauses = _clauses_of(rule, self.skolems)
        self.skolem_vars = {sk.variable for sk in self.skolems}
        self.groundings: dict = {}
        self.groundings_e: dict = {}
        self.depgraph = DependencyGraph()
        for c in self.clauses:
            if c.arity == 2 and c.skolem is None:
                vs = c.variables()
                if len(vs) == 2:
                    self.depgraph.add(vs[0], vs[1])
        self._global_rows: dict = {}  # clause index -> (all_rows, sat_rows)
        self._ctor_cache: dict = {}

    # -- constructors -------------------------------------------------------

    def _construct(self, sk: SkolemBinding, args: tuple) -> Optional[ConstructedEntity]:
        key = (sk.constructor, args)
        if key in self._ctor_cache:
            return self._ctor_cache[key]
        ctor = self.constructors.get(sk.constructor)
        if ctor is None:
            raise GroundingError(
                f"rule {self.rule.name}: no constructor registered for {sk.constructor!r}"
            )
        entity = ctor(args)
        self._ctor_cache[key] = entity
        return entity

    def _skolem_clause_value(self, c: _Clause, binding: Mapping[Var, str]) -> Optional[Interval]:
        """Value of a skolem-dependent clause atom under a binding of the args.

        Returns None when the constructor declines or (without on-demand
        grounding) the named entity does not exist.
        """
        sk = c.skolem
        args = tuple(binding[a] for a in sk.args)
        entity = self._construct(sk, args)
        if entity is None:
            return None
        subject: Subject
        resolved = []
        for t in c.terms:
            if isinstance(t, Var):
                resolved.append(entity.name if t == sk.variable else binding[t])
            else:
                resolved.append(t)
        subject = resolved[0] if len(resolved) == 1 else (resolved[0], resolved[1])
        if not self.ad_hoc and entity.name not in self.store.nodes:
            # Creation disabled and the entity was never pre-grounded.
            return None
        entry = self.store.entries.get((subject, c.pred))
        if entry is not None:
            return entry[0]
        if self.ad_hoc:
            if len(resolved) == 1:
                declared = entity.attr_value(c.pred)
            else:
                declared = entity.edge_value(resolved[0], resolved[1], c.pred)
            if declared is not None:
                return declared
        return BOTTOM

    # -- global candidate rows (used by thresholds and annotation inputs) ---

    def _initial_domain(self, var: Var) -> Optional[set]:
        """Candidate pool for a variable: predicate-map projections of the
        plain clauses that mention it."""
        domain: Optional[set] = None
        for c in self.clauses:
            if c.skolem is not None or var not in c.variables():
                continue
            if c.arity == 1:
                proj = _nodes_only(self.store.pred_map.get(c.pred, set()))
            else:
                edges = _edges_only(self.store.pred_map.get(c.pred, set()))
                pos = [i for i, t in enumerate(c.terms) if t == var]
                proj = {e[i] for e in edges for i in pos}
            domain = proj if domain is None else (domain | proj)
        return domain

    def _clause_rows(self, c: _Clause):
        """All candidate groundings of one clause over its own variables.

        Returns (rows_all, rows_sat); each row is (binding tuple, value)
        with the binding covering the clause's variables in term order.
        """
        cached = self._global_rows.get(c.index)
        if cached is not None:
            return cached
        rows_all: list = []
        rows_sat: list = []
        if c.skolem is not None:
            # Rows enumerate the full per-variable candidate pool, not the
            # narrowed sets, so head-fixed counts match the naive reading.
            arg_domains = []
            for a in c.skolem.args:
                dom = self._initial_domain(a)
                if dom is None:
                    raise GroundingError(
                        f"rule {self.rule.name}: skolem argument {a} is not bound by a "
                        "plain body clause"
                    )
                arg_domains.append(sorted(dom))
            for combo in _product(arg_domains):
                binding = dict(zip(c.skolem.args, combo))
                entity = self._construct(c.skolem, tuple(combo))
                if entity is None:
                    continue
                value = self._skolem_clause_value(c, binding)
                if value is None:
                    continue
                # Skolem rows always carry the constructor arguments, so that
                # head-fixed counts restrict correctly even when the clause
                # names only the constructed variable.
                row_bind = dict(binding)
                row_bind[c.skolem.variable] = entity.name
                row = (tuple(row_bind.items()), value)
                rows_all.append(row)
                if leq(c.bound, value):
                    rows_sat.append(row)
        elif c.arity == 1:
            term = c.terms[0]
            if isinstance(term, Var):
                for s in sorted(_nodes_only(self.store.pred_map.get(c.pred, set()))):
                    v = self.store.value(s, c.pred)
                    rows_all.append((((term, s),), v))
                    if leq(c.bound, v):
                        rows_sat.append((((term, s),), v))
            else:
                if term in self.store.pred_map.get(c.pred, ()):
                    v = self.store.value(term, c.pred)
                    rows_all.append(((), v))
                    if leq(c.bound, v):
                        rows_sat.append(((), v))
        else:
            candidates = sorted(_edges_only(self.store.pred_map.get(c.pred, set())))
            for s in candidates:
                bind: dict = {}
                ok = True
                for t, val in zip(c.terms, s):
                    if isinstance(t, Var):
                        if t in bind and bind[t] != val:
                            ok = False
                            break
                        bind[t] = val
                    elif t != val:
                        ok = False
                        break
                if not ok:
                    continue
                v = self.store.value(s, c.pred)
                row = (tuple(bind.items()), v)
                rows_all.append(row)
                if leq(c.bound, v):
                    rows_sat.append(row)
        self._global_rows[c.index] = (rows_all, rows_sat)
        return rows_all, rows_sat

    def _threshold_ok(self, c: _Clause, fixed: Mapping[Var, str]) -> bool:
        rows_all, rows_sat = self._clause_rows(c)
        sat = sum(1 for bind, _v in rows_sat if _agrees(bind, fixed))
        base = sum(1 for bind, _v in rows_all if _agrees(bind, fixed))
        return c.threshold.check(sat, base)

    def _annotation_input(self, c: _Clause, fixed: Mapping[Var, str]) -> Interval:
        _, rows_sat = self._clause_rows(c)
        vals = [v for bind, v in rows_sat if _agrees(bind, fixed)]
        if not vals:
            return c.bound
        return Interval(min(v.lower for v in vals), max(v.upper for v in vals))

    # -- candidate narrowing (the Algorithm-2 loop) --------------------------

    def _narrow(self) -> bool:
        """Run the clause loop; False means the rule certainly cannot fire."""
        plain = [c for c in self.clauses if c.skolem is None]
        ordered = [c for c in plain if c.arity == 1] + [c for c in plain if c.arity == 2]
        for c in ordered:
            if c.arity == 1:
                if not self._narrow_unary(c):
                    return False
            else:
                if not self._narrow_binary(c):
                    return False
            self._propagate()
        for c in self.clauses:
            if c.skolem is not None:
                if not self._narrow_skolem(c):
                    return False
                self._propagate()
        return True

    def _early_abort(self, c: _Clause) -> bool:
        """Counting lower-bound thresholds can be refuted from global rows."""
        if c.threshold.mode != "count" or c.threshold.comparator not in (">=", ">"):
            return False
        _, rows_sat = self._clause_rows(c)
        return not c.threshold.check(len(rows_sat), len(rows_sat))

    def _narrow_unary(self, c: _Clause) -> bool:
        term = c.terms[0]
        if isinstance(term, Var):
            if term in self.groundings:
                s = self.groundings[term]
            else:
                s = _nodes_only(_seed_unary(self.store, c.pred, c.bound))
            q = {v for v in s if _satisfies(self.store, v, c.pred, c.bound)}
            self.groundings[term] = q
            if not q:
                return False
        else:
            if not _satisfies(self.store, term, c.pred, c.bound):
                return False
        return not self._early_abort(c)

    def _narrow_binary(self, c: _Clause) -> bool:
        tx, ty = c.terms
        vx = tx if isinstance(tx, Var) else None
        vy = ty if isinstance(ty, Var) else None
        fwd, rev = self.store.adjacency.get(c.pred, ({}, {}))
        if vx is not None and vy is not None:
            key = (vx, vy)
            if vx in self.groundings and vy in self.groundings:
                if key in self.groundings_e:
                    s = self.groundings_e[key]
                else:
                    gx, gy = self.groundings[vx], self.groundings[vy]
                    s = {
                        (v, w)
                        for v in gx
                        for w in fwd.get(v, ())
                        if w in gy
                    }
            elif vx in self.groundings:
                s = {(v, w) for v in self.groundings[vx] for w in fwd.get(v, ())}
            elif vy in self.groundings:
                s = {(v, w) for w in self.groundings[vy] for v in rev.get(w, ())}
            else:
                s = _edges_only(_seed_edges(self.store, c.pred, c.bound))
            if vx == vy:
                s = {(v, w) for v, w in s if v == w}
            q = {e for e in s if _satisfies(self.store, e, c.pred, c.bound)}
            if vx == vy:
                self.groundings[vx] = {v for v, _ in q}
            else:
                self.groundings_e[key] = q
                self.groundings[vx] = {v for v, _ in q}
                self.groundings[vy] = {w for _, w in q}
            if not q:
                return False
        elif vx is not None or vy is not None:
            var = vx if vx is not None else vy
            if var in self.groundings:
                cands = self.groundings[var]
            elif vx is not None:
                cands = set(rev.get(ty, set()))
            else:
                cands = set(fwd.get(tx, set()))
            q = set()
            for v in cands:
                e = (v, ty) if vx is not None else (tx, v)
                if _satisfies(self.store, e, c.pred, c.bound):
                    q.add(v)
            self.groundings[var] = q
            if not q:
                return False
        else:
            if not _satisfies(self.store, (tx, ty), c.pred, c.bound):
                return False
        return not self._early_abort(c)

    def _narrow_skolem(self, c: _Clause) -> bool:
        sk = c.skolem
        for a in sk.args:
            if a not in self.groundings:
                raise GroundingError(
                    f"rule {self.rule.name}: skolem argument {a} is not bound by a "
                    "plain body clause"
                )
        _, rows_sat = self._clause_rows(c)
        for arg in sk.args:
            survivors = {dict(bind)[arg] for bind, _v in rows_sat}
            self.groundings[arg] = self.groundings[arg] & survivors
            if not self.groundings[arg]:
                return False
        return not self._early_abort(c)

    def _propagate(self) -> None:
        """Dependency-graph pruning: re-project pair sets until stable."""
        dirty = True
        while dirty:
            dirty = False
            for (vx, vy), pairs in list(self.groundings_e.items()):
                gx = self.groundings.get(vx, set())
                gy = self.groundings.get(vy, set())
                kept = {(v, w) for v, w in pairs if v in gx and w in gy}
                if kept != pairs:
                    self.groundings_e[(vx, vy)] = kept
                px = {v for v, _ in kept}
                py = {w for _, w in kept}
                if px != gx:
                    self.groundings[vx] = gx & px
                    dirty = True
                if py != gy:
                    self.groundings[vy] = gy & py
                    dirty = True

    # -- the exact join -------------------------------------------------------

    def _join(self) -> list:
        """Enumerate full satisfying assignments over the pruned candidates."""
        variables = sorted(
            {v for c in self.clauses for v in c.variables() if v not in self.skolem_vars}
            | {v for c in self.clauses if c.skolem for v in c.skolem.args}
            | {
                v
                for v in self.rule.head.atom.variables()
                if v not in self.skolem_vars
            },
            key=lambda v: (len(self.groundings.get(v, ())), v.name),
        )
        for v in variables:
            if v not in self.groundings:
                raise GroundingError(
                    f"rule {self.rule.name}: variable {v} is not bound by the body"
                )
        solutions: list = []

        def backtrack(i: int, binding: dict) -> None:
            if i == len(variables):
                solutions.append(dict(binding))
                return
            var = variables[i]
            for val in sorted(self.groundings[var]):
                binding[var] = val
                if self._consistent_so_far(binding):
                    backtrack(i + 1, binding)
                del binding[var]

        backtrack(0, {})
        return solutions

    def _consistent_so_far(self, binding: Mapping[Var, str]) -> bool:
        for c in self.clauses:
            vs = c.variables() if c.skolem is None else tuple(c.skolem.args)
            if any(v not in binding for v in vs):
                continue
            if c.skolem is not None:
                value = self._skolem_clause_value(c, binding)
                if value is None or not leq(c.bound, value):
                    return False
                continue
            resolved = tuple(binding[t] if isinstance(t, Var) else t for t in c.terms)
            subject = resolved[0] if len(resolved) == 1 else resolved
            if not _satisfies(self.store, subject, c.pred, c.bound):
                return False
        return True

    # -- assembling instances ----------------------------------------------------

    def run(self) -> list:
        # A head variable whose skolem constructor is unavailable (creation
        # off) and which no body clause can bind leaves nothing to fire.
        dropped = {sk.variable for sk in self.rule.skolems} - self.skolem_vars
        body_vars = {v for lit, _th in self.rule.body for v in lit.atom.variables()}
        if any(
            v in dropped and v not in body_vars
            for v in self.rule.head.atom.variables()
        ):
            return []
        if not self._narrow():
            return []
        solutions = self._join()
        if not solutions:
            return []
        head_atom = self.rule.head.atom
        skolem_by_var = {sk.variable: sk for sk in self.skolems}
        instances: dict = {}
        for sol in solutions:
            constructions: list = []
            ok = True
            resolved = []
            for t in head_atom.args:
                if isinstance(t, Var) and t in skolem_by_var:
                    sk = skolem_by_var[t]
                    args = tuple(sol[a] for a in sk.args)
                    entity = self._construct(sk, args)
                    if entity is None:
                        ok = False
                        break
                    resolved.append(entity.name)
                elif isinstance(t, Var):
                    resolved.append(sol[t])
                else:
                    resolved.append(t)
            if not ok:
                continue
            # Constructions mentioned anywhere in the rule for this assignment.
            for sk in self.skolems:
                args = tuple(sol[a] for a in sk.args)
                entity = self._construct(sk, args)
                if entity is None:
                    ok = False
                    break
                if self.ad_hoc or entity.name in self.store.nodes:
                    constructions.append(entity)
                else:
                    ok = False
                    break
            if not ok:
                continue
            head_subject: Subject = resolved[0] if len(resolved) == 1 else tuple(resolved)
            if head_subject in instances:
                continue
            fixed_all = dict(sol)
            for sk in self.skolems:
                ent = self._construct(sk, tuple(sol[a] for a in sk.args))
                fixed_all[sk.variable] = ent.name
            head_fixed = {
                v: fixed_all[v] for v in head_atom.variables() if v in fixed_all
            }
            # A satisfying assignment already witnesses one head-fixed match
            # per clause, so default at-least-one thresholds need no recount.
            if not all(
                c.threshold == DEFAULT_THRESHOLD
                or self._threshold_ok(c, _restrict(head_fixed, c))
                for c in self.clauses
            ):
                continue
            if isinstance(self.rule.head.annotation, AnnConst):
                interval = self.rule.head.annotation.value
            else:
                inputs = [
                    self._annotation_input(c, _restrict(head_fixed, c))
                    for c in self.clauses
                ]
                interval = eval_annotation(self.rule.head.annotation, inputs)
            grounding = None
            if self.atom_trace:
                grounding = tuple(sorted((v.name, c) for v, c in fixed_all.items()))
            instances[head_subject] = ApplicableInstance(
                rule_index=self.rule_index,
                rule_name=self.rule.name,
                delay=self.rule.delay,
                head_subject=head_subject,
                head_pred=head_atom.predicate,
                interval=interval,
                set_static=self.rule.set_static,
                grounding=grounding,
                constructions=tuple(constructions),
            )
        out = list(instances.values())
        out.sort(key=lambda inst: inst.sort_key())
        return out


def _restrict(fixed: Mapping[Var, str], c: _Clause) -> dict:
    vs = set(c.variables())
    if c.skolem is not None:
        vs |= set(c.skolem.args)
    return {v: x for v, x in fixed.items() if v in vs}


def _agrees(bind: tuple, fixed: Mapping[Var, str]) -> bool:
    d = dict(bind)
    return all(d.get(v, x) == x for v, x in fixed.items() if v in d)


def _nodes_only(subjects) -> set:
    return {s for s in subjects if not isinstance(s, tuple)}


def _edges_only(subjects) -> set:
    return {s for s in subjects if isinstance(s, tuple)}


def _product(domains: Sequence) -> list:
    out = [()]
    for dom in domains:
        out = [combo + (d,) for combo in out for d in dom]
    return out


def ground_rule(
    rule: Rule,
    store: InterpretationStore,
    *,
    constructors: Optional[Mapping[str, Constructor]] = None,
    ad_hoc: bool = True,
    rule_index: int = 0,
    atom_trace: bool = False,
) -> list:
    """Ground one rule against the store; returns every applicable instance.

    Reads only; the caller applies the instances (and any constructions)
    afterwards, so many rules can be grounded concurrently against the same
    store between mutations.
    """
    return _Grounder(rule, store, constructors or {}, ad_hoc, rule_index, atom_trace).run()


# ---------------------------------------------------------------------------
# Constructor helpers (usable directly or from wire-format specs)
# ---------------------------------------------------------------------------


def template_constructor(fmt: str, attrs=(), edge_pred: Optional[str] = None,
                         edge_value: Interval = Interval(1.0, 1.0)) -> Constructor:
    """Name new entities by formatting the argument constants.

    With ``edge_pred`` the constructor links the (single) argument to the
    new entity: ``edge_pred(arg, new):edge_value``.
    """

    def ctor(args: tuple) -> Optional[ConstructedEntity]:
        name = fmt.format(*args)
        edges = ()
        if edge_pred is not None:
            edges = ((args[0], name, edge_pred, edge_value),)
        return ConstructedEntity(name, tuple(attrs), edges)

    return ctor


def map_constructor(table: Mapping[str, str], default_fmt: Optional[str] = None,
                    edge_pred: Optional[str] = None,
                    edge_value: Interval = Interval(1.0, 1.0)) -> Constructor:
    """Name new entities from a lookup table (None outside it unless a
    default format is given)."""

    def ctor(args: tuple) -> Optional[ConstructedEntity]:
        key = args[0]
        if key in table:
            name = table[key]
        elif default_fmt is not None:
            name = default_fmt.format(*args)
        else:
            return None
        edges = ()
        if edge_pred is not None:
            edges = ((args[0], name, edge_pred, edge_value),)
        return ConstructedEntity(name, (), edges)

    return ctor


def replace_constructor(old: str, new: str, attrs=()) -> Constructor:
    """Name new entities by substring replacement on the argument."""

    def ctor(args: tuple) -> Optional[ConstructedEntity]:
        return ConstructedEntity(args[0].replace(old, new), tuple(attrs), ())

    return ctor


def constructor_from_spec(spec: Mapping) -> Constructor:
    """Build a constructor from a JSON-friendly spec (see the service docs).

    Kinds: ``template`` (format string over the args), ``map`` (lookup
    table with optional default format), ``replace`` (substring rewrite of
    the first arg), ``grid`` (bounded-grid neighbor).
    """
    kind = spec.get("kind")
    attrs = tuple(
        (p, Interval(lo, up)) for p, (lo, up) in sorted(spec.get("attrs", {}).items())
    )
    if kind == "template":
        return template_constructor(
            spec["format"], attrs=attrs, edge_pred=spec.get("edge_pred")
        )
    if kind == "map":
        return map_constructor(
            dict(spec["table"]),
            spec.get("default"),
            edge_pred=spec.get("edge_pred"),
        )
    if kind == "replace":
        return replace_constructor(spec["old"], spec["new"], attrs=attrs)
    if kind == "grid":
        fixed = attrs

        def cell_attrs(x: int, y: int) -> tuple:
            return fixed

        return grid_constructor(
            spec["width"],
            spec["height"],
            spec["dx"],
            spec["dy"],
            pred=spec["pred"],
            cell_attrs=cell_attrs if fixed else None,
            name_fmt=spec.get("name_fmt", "c_{x}_{y}"),
        )
    raise GroundingError(f"unknown constructor kind {kind!r}")


def grid_constructor(width: int, height: int, dx: int, dy: int, pred: str,
                     cell_attrs: Optional[Callable[[int, int], tuple]] = None,
                     name_fmt: str = "c_{x}_{y}") -> Constructor:
    """Neighbor constructor over a bounded grid of ``name_fmt`` cells.

    Declines to construct outside the grid, which is how movement rules stay
    shielded at the map border without consulting pre-grounded facts.
    ``cell_attrs(x, y)`` supplies the unary annotations the new cell carries.
    """

    def parse_cell(name: str):
        parts = name.split("_")
        return int(parts[-2]), int(parts[-1])

    def ctor(args: tuple) -> Optional[ConstructedEntity]:
        try:
            x, y = parse_cell(args[0])
        except (ValueError, IndexError):
            return None
        nx_, ny_ = x + dx, y + dy
        if not (0 <= nx_ < width and 0 <= ny_ < height):
            return None
        name = name_fmt.format(x=nx_, y=ny_)
        attrs = tuple(cell_attrs(nx_, ny_)) if cell_attrs else ()
        edges = ((args[0], name, pred, Interval(1.0, 1.0)),)
        return ConstructedEntity(name, attrs, edges)

    return ctor
