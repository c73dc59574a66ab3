"""Interval truth values and the lower semi-lattice they live in.

An annotation is a closed sub-interval ``[lower, upper]`` of the unit
interval.  ``[0, 1]`` is the bottom element (total uncertainty), and the
order goes *up* as intervals get tighter: ``a <= b`` iff ``b`` is contained
in ``a``.  ``[1, 1]`` is truth, ``[0, 0]`` is falsehood, and both sit at the
top rim of the lattice, mutually incomparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

__all__ = [
    "Interval",
    "InconsistentSup",
    "BOTTOM",
    "TRUE",
    "FALSE",
    "EPS",
    "leq",
    "negate",
    "sup",
    "AnnConst",
    "AnnVar",
    "AnnFunc",
    "AnnotationExpr",
    "AnnotationError",
    "eval_annotation",
    "register_annotation_function",
    "annotation_function_names",
]

# Equality tolerance used for change detection; values themselves are kept
# as plain binary floats.
EPS = 1e-9


@dataclass(frozen=True, slots=True)
class Interval:
    """A closed interval within [0, 1].

    ``lower > upper`` is permitted only as a transient artifact (a failed
    supremum); such intervals are never stored in an interpretation.
    """

    lower: float
    upper: float

    def __post_init__(self):
        lo, up = float(self.lower), float(self.upper)
        if not (0.0 <= lo <= 1.0) or not (0.0 <= up <= 1.0):
            raise ValueError(f"interval bounds must lie in [0,1]: [{lo},{up}]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def is_valid(self) -> bool:
        return self.lower <= self.upper

    @property
    def is_bottom(self) -> bool:
        return self.lower == 0.0 and self.upper == 1.0

    def approx_eq(self, other: "Interval", eps: float = EPS) -> bool:
        return abs(self.lower - other.lower) <= eps and abs(self.upper - other.upper) <= eps

    def __str__(self) -> str:
        return f"[{format_bound(self.lower)},{format_bound(self.upper)}]"


def format_bound(v: float) -> str:
    """Render one bound with at least one decimal place; round-trips via float()."""
    if v == int(v):
        return f"{v:.1f}"
    return repr(float(v))


BOTTOM = Interval(0.0, 1.0)
TRUE = Interval(1.0, 1.0)
FALSE = Interval(0.0, 0.0)


@dataclass(frozen=True, slots=True)
class InconsistentSup:
    """Marker returned by :func:`sup` when the inputs have no upper bound.

    Carries a witness pair of mutually incomparable intervals.
    """

    a: Interval
    b: Interval


def leq(a: Interval, b: Interval) -> bool:
    """Lattice order: ``a <= b`` iff ``b`` is a sub-interval of ``a``."""
    return b.lower >= a.lower and b.upper <= a.upper


def negate(a: Interval) -> Interval:
    """Negation: [l,u] -> [1-u, 1-l].  An involution."""
    return Interval(1.0 - a.upper, 1.0 - a.lower)


def sup(values: Iterable[Interval]) -> Union[Interval, InconsistentSup]:
    """Least upper bound of a nonempty set of intervals.

    Componentwise ``[max lower, min upper]``.  When the result would be
    empty (max lower > min upper) there is no upper bound in the lattice;
    an :class:`InconsistentSup` carrying two incomparable witnesses is
    returned instead.
    """
    vals = list(values)
    if not vals:
        raise ValueError("sup of an empty set")
    lo = max(v.lower for v in vals)
    up = min(v.upper for v in vals)
    if lo > up:
        wit_lo = max(vals, key=lambda v: v.lower)
        wit_up = min(vals, key=lambda v: v.upper)
        return InconsistentSup(wit_lo, wit_up)
    return Interval(lo, up)


# ---------------------------------------------------------------------------
# Annotation expressions
# ---------------------------------------------------------------------------


class AnnotationError(ValueError):
    """Unknown annotation function, bad arity, or unbound clause reference."""


@dataclass(frozen=True, slots=True)
class AnnConst:
    value: Interval


@dataclass(frozen=True, slots=True)
class AnnVar:
    """Reference to the annotation of the body clause with this 1-based index."""

    index: int


@dataclass(frozen=True, slots=True)
class AnnFunc:
    name: str
    args: tuple["AnnotationExpr", ...]


AnnotationExpr = Union[AnnConst, AnnVar, AnnFunc]


def _fn_min(args: Sequence[Interval]) -> Interval:
    return Interval(min(a.lower for a in args), min(a.upper for a in args))


def _fn_product(args: Sequence[Interval]) -> Interval:
    return Interval(math.prod(a.lower for a in args), math.prod(a.upper for a in args))


def _fn_average(args: Sequence[Interval]) -> Interval:
    n = len(args)
    return Interval(sum(a.lower for a in args) / n, sum(a.upper for a in args) / n)


_ANNOTATION_FUNCTIONS: dict[str, Callable[[Sequence[Interval]], Interval]] = {
    "min": _fn_min,
    "product": _fn_product,
    "average": _fn_average,
}


def register_annotation_function(name: str, fn: Callable[[Sequence[Interval]], Interval]) -> None:
    _ANNOTATION_FUNCTIONS[name] = fn


def annotation_function_names() -> tuple[str, ...]:
    return tuple(sorted(_ANNOTATION_FUNCTIONS))


def _clamp01(v: float) -> float:
    return 0.0 if v < 0.0 else 1.0 if v > 1.0 else v


def eval_annotation(expr: AnnotationExpr, bindings: Sequence[Interval]) -> Interval:
    """Evaluate a head annotation given one interval per body clause.

    ``AnnVar(i)`` is 1-based into ``bindings``.  Function results are
    clamped back into [0,1] so arbitrary user functions stay in the lattice.
    """
    if isinstance(expr, AnnConst):
        return expr.value
    if isinstance(expr, AnnVar):
        i = expr.index
        if not (1 <= i <= len(bindings)):
            raise AnnotationError(f"annotation variable {i} has no matching body clause")
        return bindings[i - 1]
    if isinstance(expr, AnnFunc):
        fn = _ANNOTATION_FUNCTIONS.get(expr.name)
        if fn is None:
            raise AnnotationError(f"unknown annotation function {expr.name!r}")
        if not expr.args:
            raise AnnotationError(f"annotation function {expr.name!r} needs at least one argument")
        args = [eval_annotation(a, bindings) for a in expr.args]
        out = fn(args)
        return Interval(_clamp01(out.lower), _clamp01(out.upper))
    raise AnnotationError(f"not an annotation expression: {expr!r}")
