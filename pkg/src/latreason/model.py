"""Logical vocabulary and program AST.

Atoms are unary (node attributes) or binary (edge attributes).  Rules carry
a delay: a rule fired at time ``t`` constrains its head at ``t + delay``.
``delay == 0`` marks an immediate rule whose effects cascade within the
same time point.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Mapping, Union

from .intervals import (
    AnnConst,
    AnnFunc,
    AnnotationExpr,
    AnnVar,
    Interval,
    annotation_function_names,
    negate,
)

__all__ = [
    "Var",
    "Term",
    "Subject",
    "Atom",
    "AnnotatedLiteral",
    "Threshold",
    "DEFAULT_THRESHOLD",
    "SkolemBinding",
    "Rule",
    "TemporalFact",
    "Program",
    "GroundingConflict",
    "ground",
    "validate",
    "Diagnostic",
]

_VAR_RE = re.compile(r"^[A-Z][A-Za-z0-9_]*$")


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[str, Var]
# A ground subject: a node id, or an edge as a (source, target) pair.
Subject = Union[str, tuple]


def is_variable_token(tok: str) -> bool:
    """Unquoted identifiers matching [A-Z][A-Za-z0-9_]* are variables in rules."""
    return bool(_VAR_RE.match(tok))


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple

    def __post_init__(self):
        if len(self.args) not in (1, 2):
            raise ValueError(f"atom arity must be 1 or 2, got {len(self.args)}: {self.predicate}")

    @property
    def is_ground(self) -> bool:
        return all(isinstance(a, str) for a in self.args)

    @property
    def arity(self) -> int:
        return len(self.args)

    def variables(self) -> tuple:
        return tuple(a for a in self.args if isinstance(a, Var))

    def subject(self) -> Subject:
        """The node or edge this ground atom annotates."""
        if not self.is_ground:
            raise ValueError(f"atom is not ground: {self}")
        return self.args[0] if len(self.args) == 1 else (self.args[0], self.args[1])

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True, slots=True)
class AnnotatedLiteral:
    atom: Atom
    annotation: AnnotationExpr
    negated: bool = False

    def normalized(self) -> "AnnotatedLiteral":
        """Fold a negated literal with constant annotation into a positive one."""
        if not self.negated:
            return self
        if not isinstance(self.annotation, AnnConst):
            raise ValueError(
                f"negated literal {self.atom} needs a constant annotation to normalize"
            )
        return AnnotatedLiteral(self.atom, AnnConst(negate(self.annotation.value)), False)


@dataclass(frozen=True, slots=True)
class Threshold:
    comparator: str  # one of >=, >, <=, <, =
    mode: str  # "count" | "percent"
    value: float

    _CMP = {
        ">=": lambda a, b: a >= b,
        ">": lambda a, b: a > b,
        "<=": lambda a, b: a <= b,
        "<": lambda a, b: a < b,
        "=": lambda a, b: a == b,
    }

    def __post_init__(self):
        if self.comparator not in self._CMP:
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.mode not in ("count", "percent"):
            raise ValueError(f"threshold mode must be count or percent, got {self.mode!r}")

    def check(self, satisfied: int, base: int) -> bool:
        """Apply to a satisfied-count over a candidate base (base used by percent)."""
        if self.mode == "count":
            measured: float = satisfied
        else:
            measured = 100.0 * satisfied / base if base else 0.0
        return self._CMP[self.comparator](measured, self.value)

    def __str__(self) -> str:
        v = int(self.value) if self.value == int(self.value) else self.value
        return f"{{{self.comparator} {self.mode} {v}}}"


DEFAULT_THRESHOLD = Threshold(">=", "count", 1)


@dataclass(frozen=True, slots=True)
class SkolemBinding:
    """Bind a rule variable to a named constructor over other rule variables.

    When the engine grounds on demand, ``variable`` takes the constant the
    constructor returns for the bound ``args``; the constructor may decline
    (return None), in which case no instance is produced for that binding.
    """

    variable: Var
    constructor: str
    args: tuple


@dataclass(frozen=True, slots=True)
class Rule:
    head: AnnotatedLiteral
    body: tuple  # of (AnnotatedLiteral, Threshold)
    delay: int = 0
    set_static: bool = False
    name: str = ""
    skolems: tuple = ()

    @property
    def is_immediate(self) -> bool:
        return self.delay == 0

    def variables(self) -> set:
        out = set(self.head.atom.variables())
        for lit, _ in self.body:
            out.update(lit.atom.variables())
        for sk in self.skolems:
            out.add(sk.variable)
            out.update(sk.args)
        return out

    def skolem_vars(self) -> set:
        return {sk.variable for sk in self.skolems}


@dataclass(frozen=True, slots=True)
class TemporalFact:
    atom: Atom
    annotation: Interval
    t_start: int
    t_end: int
    static: bool = False

    def __post_init__(self):
        if not self.atom.is_ground:
            raise ValueError(f"fact atom must be ground: {self.atom}")


@dataclass(frozen=True)
class Program:
    rules: tuple = ()
    facts: tuple = ()
    ipl: tuple = ()  # unordered predicate pairs that must stay complementary
    t_max: int = 0
    # Universe seeded from the knowledge graph; fact subjects are unioned in
    # by the engine at startup.
    nodes: frozenset = frozenset()
    edges: frozenset = frozenset()

    def named_rules(self) -> tuple:
        """Rules with stable names: user-supplied or rule_<index>."""
        out = []
        for i, r in enumerate(self.rules):
            out.append(r if r.name else replace(r, name=f"rule_{i}"))
        return tuple(out)

    def predicates(self) -> set:
        preds = set()
        for r in self.rules:
            preds.add(r.head.atom.predicate)
            for lit, _ in r.body:
                preds.add(lit.atom.predicate)
        for f in self.facts:
            preds.add(f.atom.predicate)
        return preds


class GroundingConflict(ValueError):
    """A substitution collapsed two distinct body atoms into one."""


def _subst_term(term: Term, subst: Mapping[Var, str]) -> Term:
    if isinstance(term, Var):
        if term not in subst:
            raise KeyError(f"no substitution for variable {term}")
        return subst[term]
    return term


def _subst_atom(atom: Atom, subst: Mapping[Var, str]) -> Atom:
    return Atom(atom.predicate, tuple(_subst_term(a, subst) for a in atom.args))


def ground(rule: Rule, subst: Mapping[Var, str]) -> Rule:
    """Apply a variable -> constant substitution covering the whole rule.

    Rejects substitutions that merge two body literals into the same atom;
    the distinct-atom requirement on rules is rechecked post-substitution.
    """
    missing = rule.variables() - set(subst)
    if missing:
        raise KeyError(f"substitution misses variables: {sorted(v.name for v in missing)}")
    head = AnnotatedLiteral(
        _subst_atom(rule.head.atom, subst), rule.head.annotation, rule.head.negated
    )
    body = tuple(
        ((AnnotatedLiteral(_subst_atom(lit.atom, subst), lit.annotation, lit.negated)), th)
        for lit, th in rule.body
    )
    seen = set()
    for lit, _ in body:
        key = (lit.atom, lit.negated)
        if key in seen:
            raise GroundingConflict(f"substitution collapses body literals onto {lit.atom}")
        seen.add(key)
    return replace(rule, head=head, body=body, skolems=())


@dataclass(frozen=True, slots=True)
class Diagnostic:
    where: str
    message: str

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


def _annotation_var_indices(expr: AnnotationExpr) -> set:
    if isinstance(expr, AnnVar):
        return {expr.index}
    if isinstance(expr, AnnFunc):
        out: set = set()
        for a in expr.args:
            out |= _annotation_var_indices(a)
        return out
    return set()


def _annotation_func_names(expr: AnnotationExpr) -> set:
    if isinstance(expr, AnnFunc):
        out = {expr.name}
        for a in expr.args:
            out |= _annotation_func_names(a)
        return out
    return set()


def validate(program: Program) -> list:
    """Check all structural invariants; returns a list of diagnostics (empty = ok)."""
    diags: list[Diagnostic] = []
    rules = program.named_rules()
    for rule in rules:
        where = f"rule {rule.name}"
        seen = set()
        for lit, th in rule.body:
            key = (lit.atom, lit.negated)
            if key in seen:
                diags.append(Diagnostic(where, f"duplicate body literal {lit.atom}"))
            seen.add(key)
            if lit.negated and not isinstance(lit.annotation, AnnConst):
                diags.append(
                    Diagnostic(where, f"negated literal {lit.atom} needs a constant annotation")
                )
            if not isinstance(lit.annotation, AnnConst):
                diags.append(
                    Diagnostic(where, f"body clause {lit.atom} must carry a constant interval")
                )
            elif not lit.annotation.value.is_valid:
                diags.append(Diagnostic(where, f"empty interval on body clause {lit.atom}"))
            if th.mode == "percent" and not (0.0 <= th.value <= 100.0):
                diags.append(Diagnostic(where, f"percent threshold out of [0,100]: {th.value}"))
        if rule.delay < 0:
            diags.append(Diagnostic(where, f"negative delay {rule.delay}"))
        for idx in _annotation_var_indices(rule.head.annotation):
            if not (1 <= idx <= len(rule.body)):
                diags.append(
                    Diagnostic(where, f"head annotation references missing clause {idx}")
                )
        for fname in _annotation_func_names(rule.head.annotation):
            if fname not in annotation_function_names():
                diags.append(Diagnostic(where, f"unknown annotation function {fname!r}"))
        skvars = rule.skolem_vars()
        body_vars = set()
        for lit, _ in rule.body:
            body_vars.update(lit.atom.variables())
        for sk in rule.skolems:
            for a in sk.args:
                if a not in body_vars and a not in {v for v in rule.head.atom.variables()}:
                    diags.append(
                        Diagnostic(where, f"skolem argument {a} is not bound by the body")
                    )
        for v in rule.head.atom.variables():
            if v not in body_vars and v not in skvars:
                diags.append(Diagnostic(where, f"head variable {v} is unbound"))
    for i, fact in enumerate(program.facts):
        where = f"fact {i} ({fact.atom})"
        if fact.t_start < 0 or fact.t_end < fact.t_start:
            diags.append(Diagnostic(where, "empty time range"))
        elif fact.t_end > program.t_max:
            diags.append(
                Diagnostic(where, f"time range end {fact.t_end} exceeds t_max {program.t_max}")
            )
        if not fact.annotation.is_valid:
            diags.append(Diagnostic(where, "empty annotation interval"))
    declared = program.predicates()
    for p, q in program.ipl:
        if p not in declared or q not in declared:
            diags.append(Diagnostic("ipl", f"pair ({p},{q}) references undeclared predicates"))
    return diags
