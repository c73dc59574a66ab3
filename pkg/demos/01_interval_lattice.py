"""Interval truth values and the lower semi-lattice.

Annotations are closed sub-intervals of [0,1].  The bottom element [0,1]
means total uncertainty; inference only ever tightens intervals, which is
what makes open-world reasoning cheap: anything still at the bottom never
needs to be stored.
"""

from latreason import (
    BOTTOM,
    FALSE,
    TRUE,
    AnnFunc,
    AnnVar,
    Interval,
    eval_annotation,
    leq,
    negate,
    sup,
)

print("bottom:", BOTTOM, " truth:", TRUE, " falsehood:", FALSE)
print()

print("The order goes up as intervals tighten:")
print(f"  {BOTTOM} <= {TRUE}  ->", leq(BOTTOM, TRUE))
print(f"  {TRUE} <= {BOTTOM}  ->", leq(TRUE, BOTTOM))
print(f"  [0.1,1.0] <= [0.934,1.0] ->", leq(Interval(0.1, 1), Interval(0.934, 1)))
print()

print("Negation flips an interval around 1/2 and is an involution:")
for iv in (TRUE, BOTTOM, Interval(0.2, 0.7)):
    print(f"  negate({iv}) = {negate(iv)};  negate twice = {negate(negate(iv))}")
print()

print("The supremum is the tightest interval above all inputs;")
print("disjoint inputs have no upper bound, which is how contradictions surface:")
print("  sup([0.2,0.9], [0.5,1.0]) =", sup([Interval(0.2, 0.9), Interval(0.5, 1.0)]))
print("  sup([1,1], [0,0])         =", sup([TRUE, FALSE]))
print()

print("Head annotations may combine body evidence with built-in functions:")
bindings = [Interval(0.5, 1.0), Interval(0.5, 0.8)]
for fn in ("min", "product", "average"):
    expr = AnnFunc(fn, (AnnVar(1), AnnVar(2)))
    print(f"  {fn}([0.5,1.0], [0.5,0.8]) = {eval_annotation(expr, bindings)}")
