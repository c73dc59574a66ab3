"""The per-application growth bound, watched live.

Each fixpoint application can create at most, for every rule, the product
of the per-predicate atom counts over its body clauses.  The engine records
that bound next to the actual number of newly materialized atoms; the gap
is what on-demand grounding saves in practice.
"""

from latreason import EngineConfig, Program, parse_fact, parse_rule, run

program = Program(
    rules=(
        parse_rule("knows2 :: knows(X,Z):[0.8,1] <-1 knows(X,Y):[0.5,1], knows(Y,Z):[0.5,1]"),
        parse_rule("social :: social(X):[0.9,1] <-1 knows(X,Y):[0.5,1] {>= count 2}"),
        parse_rule("hub :: hub(X):[1,1] <-0 social(X):[0.9,1], knows(X,X):[0.5,1]"),
    ),
    facts=tuple(
        parse_fact(f"knows({a},{b}):[1,1] @ [0,0]")
        for a, b in [("ann", "bob"), ("bob", "cat"), ("cat", "dan"), ("dan", "ann"),
                     ("ann", "eve"), ("eve", "bob")]
    ),
    t_max=4,
)

result = run(program, EngineConfig(t_max=4, persistent=True))

print(f"{len(program.rules)} rules, {len(program.facts)} base facts, t_max={program.t_max}")
print()
print("step  t  gamma  new_atoms  bound  within_bound")
for s in result.stats:
    print(
        f"{s.step:4d}  {s.t}  {s.fp_step:5d}  {s.delta_total:9d}  {s.bound:5d}  "
        f"{str(s.delta_total <= s.bound).lower()}"
    )
print()
print("Every row stays within its bound; the same table is what")
print("`latreason bound-report` renders from a run's stats.csv.")
