"""A delayed rule feeding an immediate rule.

rule_1 derives b one time point after a holds; rule_2 is immediate
(zero delay), so it cascades inside the same time point the moment b
appears.  The run prints the interpretation per time point and the full
rule trace, which is the engine's explanation of every change.
"""

from latreason import EngineConfig, Program, parse_fact, parse_rule, run

program = Program(
    rules=(
        parse_rule("rule_1 :: b(X):[1,1] <-1 a(X):[1,1]"),
        parse_rule("rule_2 :: c(X):[1,1] <-0 b(X):[1,1]"),
    ),
    facts=(
        parse_fact("a(x):[1,1] @ [1,1]"),
        parse_fact("a(x):[1,1] @ [3,3]"),
    ),
    t_max=4,
)

result = run(program, EngineConfig(t_max=4, persistent=False))
print("status:", result.status.value)
print()

print("interpretation per time point (non-bottom atoms only):")
for t, rows in enumerate(result.history):
    atoms = ", ".join(f"{p}({s})={iv}" for s, p, iv, _ in rows) or "-"
    print(f"  t={t}:  {atoms}")
print()

print("rule trace:")
print(result.trace.export("tsv").decode(), end="")
