"""Knowledge-graph completion with confidence rules and multi-step inference.

A learned rule's confidence becomes the lower bound of the head annotation,
so derived edges carry scores and candidates can be ranked.  Chaining rules
need one inference step per hop: the second run below only finds the gold
answers because it lets derivations build on the first step's output.
"""

from latreason.graphio import graph_from_triples
from latreason.kgeval import Query, compare_steps, complete
from latreason.parsing import parse_rule

print("-- single-triple pipeline --")
graph = graph_from_triples([("Chelsy_Davy", "playsFor", "Panathinaikos_F.C.")])
rule = parse_rule(
    "isAffiliatedTo(X,X0):[0.934,1] <-1 playsFor(X,X0):[0.1,1], "
    "Panathinaikos_F.C.(X0):[1,1]"
)
metrics = complete(
    graph, [rule], 1, [Query("Chelsy_Davy", "isAffiliatedTo", "Panathinaikos_F.C.")]
)
top = metrics.rankings[0][0]
print(f"derived isAffiliatedTo(Chelsy_Davy, {top.entity}) with score {top.score}")
print(f"hits@1={metrics.hits[1]}  mrr={metrics.mrr}")

print()
print("-- chained toy graph: one step vs two --")
graph2 = graph_from_triples(
    [("a", "r1", "b"), ("b", "r2", "c"), ("d", "r1", "e"), ("e", "r2", "f")]
)
rules = [
    parse_rule("s(X,Z):[0.9,1] <-1 r1(X,Y):[0.1,1], r2(Y,Z):[0.1,1]"),
    parse_rule("goal(X,Z):[0.7,1] <-1 s(X,Z):[0.5,1]"),
]
queries = [Query("a", "goal", "c"), Query("d", "goal", "f")]
for m in compare_steps(graph2, rules, queries, [1, 2], node_id_labels=False):
    print(
        f"steps={m.steps}: hits@1={m.hits[1]:.2f} hits@10={m.hits[10]:.2f} "
        f"mrr={m.mrr:.2f} precision={m.precision:.2f} recall={m.recall:.2f} "
        f"ground_atoms={m.ground_atoms}"
    )
