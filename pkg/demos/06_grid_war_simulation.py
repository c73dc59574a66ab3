"""Driving the grid-war world through the simulation session.

The engine acts as the environment: actions are injected as one-shot
facts, immediate rules gate them (a move into a blocked cell simply never
fires - shielding), delayed rules apply the dynamics one step later, and
shooting spawns a bullet entity on demand that then flies by itself.

This replays the evasion episode the world is built around: the red agent
walks down the western column, blue shoots left to intercept, and red
backtracks to evade.
"""

from latreason.simservice import SimSession
from latreason.scenarios.gridworld import evasion_script

session = SimSession()
resp = session.handle({"cmd": "load", "builtin": "evasion"})
print("loaded; initial positions:",
      [o["subject"] for o in resp["observations"]
       if o["predicate"] == "atLoc" and o["bounds"] == [1.0, 1.0]])

script = dict(evasion_script())
for t in range(1, 22):
    actions = [f"{pred}({','.join(args)}):[1,1]" for pred, args in script.get(t, [])]
    if actions:
        session.handle({"cmd": "set_facts", "facts": actions})
    resp = session.handle({"cmd": "step", "n": 1})
    interesting = [
        e for e in resp["trace"]
        if e["predicate"] in {"moveDown", "moveUp", "atLoc", "shootLeftB", "direction"}
    ]
    if interesting:
        print(f"\nt={t}:")
        for e in interesting:
            print(f"  {e['subject']:22s} {e['predicate']:10s} "
                  f"{e['old']} -> {e['new']}   ({e['rule']})")

print("\nfinal positions:",
      [o["subject"] for o in resp["observations"]
       if o["predicate"] == "atLoc" and o["bounds"] == [1.0, 1.0]])
print("terminal:", resp["terminal"])
