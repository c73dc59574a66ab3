"""Geospatial scenarios: two patrolling agents, and a bounded grid map.

The two-agent program moves a fast patrol car left and a slow foot patrol
right from a shared starting location; the target locations do not exist
up front and are skolemized into being when the movement rules apply.

The grid scenario scales the same idea to a (2^resolution)^2 map with
several agents.  It can be built two ways: on-demand (only the occupied
cells exist, the movement constructors create neighbors as agents walk)
or fully grounded (every cell and every adjacency relation pre-asserted),
which is what the on-demand savings are measured against.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..engine import EngineConfig
from ..grounding import grid_constructor, map_constructor
from ..intervals import TRUE
from ..model import Program, TemporalFact, Atom
from ..parsing import parse_fact, parse_rule

__all__ = [
    "geo_program",
    "geo_constructors",
    "geo_config",
    "geo_universe_facts",
    "GEO_DYNAMIC_PREDICATES",
    "GridScenario",
    "build_grid_scenario",
    "GRID_DYNAMIC_PREDICATES",
]

GEO_DYNAMIC_PREDICATES = frozenset({"at"})

_GEO_RULES = [
    "rule_1 :: at(A,L2):[1,1] <-1 at(A,L1):[1,1], moveLeft(A):[1,1], speed(A,fast):[1,1], left(L1,L2):[1,1] skolem L2=leftOf(L1)",
    "rule_2 :: at(A,L2):[1,1] <-2 at(A,L1):[1,1], moveRight(A):[1,1], speed(A,slow):[1,1], right(L1,L2):[1,1] skolem L2=rightOf(L1)",
    "rule_3 :: at(A,L1):[0,0] <-1 at(A,L1):[1,1], moveLeft(A):[1,1]",
    "rule_4 :: at(A,L1):[0,0] <-1 at(A,L1):[1,1], moveRight(A):[1,1]",
]

_GEO_FACTS = [
    "at(footPatrol,locMid):[1,1] @ [0,0]",
    "at(patrolCar,locMid):[1,1] @ [0,0]",
    "moveLeft(patrolCar):[1,1] @ [0,0]",
    "moveRight(footPatrol):[1,1] @ [0,0]",
    "speed(patrolCar,fast):[1,1] @ [0,0] static",
    "speed(footPatrol,slow):[1,1] @ [0,0] static",
]


def geo_program(t_max: int = 2, skolemize: bool = True) -> Program:
    """The two-agent patrol program; without skolemization the left/right
    neighbors are pre-grounded as universe facts instead."""
    facts = [parse_fact(f) for f in _GEO_FACTS]
    if not skolemize:
        facts.extend(geo_universe_facts(t_max))
    return Program(
        rules=tuple(parse_rule(r) for r in _GEO_RULES),
        facts=tuple(facts),
        t_max=t_max,
    )


def geo_universe_facts(t_max: int) -> list:
    return [
        TemporalFact(Atom("left", ("locMid", "locLeft")), TRUE, 0, 0, True),
        TemporalFact(Atom("right", ("locMid", "locRight")), TRUE, 0, 0, True),
    ]


def geo_constructors() -> dict:
    return {
        "leftOf": map_constructor({"locMid": "locLeft"}, "leftOf({0})", edge_pred="left"),
        "rightOf": map_constructor({"locMid": "locRight"}, "rightOf({0})", edge_pred="right"),
    }


def geo_config(t_max: int = 2, skolemize: bool = True, **overrides) -> EngineConfig:
    settings = dict(
        t_max=t_max,
        persistent=True,
        ad_hoc_grounding=skolemize,
        inconsistency_mode="override",
        volatile_predicates=frozenset({"moveLeft", "moveRight"}),
    )
    settings.update(overrides)
    return EngineConfig(**settings)


# ---------------------------------------------------------------------------
# Bounded grid map with several agents
# ---------------------------------------------------------------------------

_DIRS = {
    "right": (1, 0),
    "left": (-1, 0),
    "up": (0, 1),
    "down": (0, -1),
}

GRID_DYNAMIC_PREDICATES = frozenset({"atLoc"})


def _cell(x: int, y: int) -> str:
    return f"c_{x}_{y}"


def _is_border(x: int, y: int, side: int) -> bool:
    return x in (0, side - 1) or y in (0, side - 1)


def _grid_rules(agent_kind: str, guard: str) -> list:
    """Movement rules for one agent kind; border agents carry a border guard."""
    rules = []
    for d in _DIRS:
        guard_clause = f", {guard}(L2):[1,1]" if guard else ""
        rules.append(
            parse_rule(
                f"go_{agent_kind}_{d} :: atLoc(A,L2):[1,1] <-1 {agent_kind}(A):[1,1], "
                f"move_{d}(A):[1,1], atLoc(A,L1):[1,1], adj_{d}(L1,L2):[1,1]{guard_clause} "
                f"skolem L2=mk_{d}(L1)"
            )
        )
        rules.append(
            parse_rule(
                f"leave_{agent_kind}_{d} :: atLoc(A,L1):[0,0] <-1 {agent_kind}(A):[1,1], "
                f"move_{d}(A):[1,1], atLoc(A,L1):[1,1]"
            )
        )
    return rules


@dataclass
class GridScenario:
    program: Program
    config: EngineConfig
    constructors: dict
    side: int
    agents: list  # (name, kind, start cell)
    actions: list  # per time step: [(agent, direction)]


def _cell_attrs(side: int):
    def attrs(x: int, y: int):
        out = [("cell", TRUE)]
        if _is_border(x, y, side):
            out.append(("borderLoc", TRUE))
        return tuple(out)

    return attrs


def build_grid_scenario(
    resolution: int = 4,
    agents_per_team: int = 2,
    actions: int = 20,
    skolemize: bool = True,
    seed: int = 7,
) -> GridScenario:
    """Two teams of border+field agents taking seeded random walks.

    ``resolution`` follows the map convention: the side is 2^resolution.
    In the fully grounded build every cell, every directed adjacency
    relation, and every border marker is asserted up front; on demand only
    the agents' starting cells exist.
    """
    side = 2 ** resolution
    rng = random.Random(seed)
    t_max = actions
    rules = _grid_rules("fieldAgent", "") + _grid_rules("borderAgent", "borderLoc")

    agents = []
    corners = [(0, 0), (side - 1, side - 1), (0, side - 1), (side - 1, 0)]
    for team in range(2):
        for i in range(agents_per_team):
            kind = "borderAgent" if i % 2 else "fieldAgent"
            name = f"{'red' if team == 0 else 'blue'}_{kind}_{i}"
            x, y = corners[team]
            agents.append((name, kind, (x, y)))

    facts = []
    for name, kind, (x, y) in agents:
        facts.append(TemporalFact(Atom(kind, (name,)), TRUE, 0, 0, True))
        facts.append(TemporalFact(Atom("atLoc", (name, _cell(x, y))), TRUE, 0, 0, False))

    cell_attrs = _cell_attrs(side)
    if skolemize:
        for name, kind, (x, y) in agents:
            for pred, iv in cell_attrs(x, y):
                facts.append(TemporalFact(Atom(pred, (_cell(x, y),)), iv, 0, 0, True))
    else:
        for x in range(side):
            for y in range(side):
                for pred, iv in cell_attrs(x, y):
                    facts.append(TemporalFact(Atom(pred, (_cell(x, y),)), iv, 0, 0, True))
                for d, (dx, dy) in _DIRS.items():
                    nx_, ny_ = x + dx, y + dy
                    if 0 <= nx_ < side and 0 <= ny_ < side:
                        facts.append(
                            TemporalFact(
                                Atom(f"adj_{d}", (_cell(x, y), _cell(nx_, ny_))),
                                TRUE,
                                0,
                                0,
                                True,
                            )
                        )

    # Seeded random walk: every agent picks a direction each step.  Border
    # agents walk along their edge; field agents roam.  The same action
    # stream is injected into both builds.
    action_schedule = []
    for t in range(1, actions + 1):
        step_actions = []
        for name, kind, _start in agents:
            step_actions.append((name, rng.choice(list(_DIRS))))
        action_schedule.append((t, step_actions))
    for t, step_actions in action_schedule:
        for name, d in step_actions:
            facts.append(TemporalFact(Atom(f"move_{d}", (name,)), TRUE, t - 1, t - 1, False))

    constructors = {
        f"mk_{d}": grid_constructor(
            side, side, dx, dy, pred=f"adj_{d}", cell_attrs=cell_attrs
        )
        for d, (dx, dy) in _DIRS.items()
    }

    config = EngineConfig(
        t_max=t_max,
        persistent=True,
        ad_hoc_grounding=skolemize,
        inconsistency_mode="override",
        volatile_predicates=frozenset(f"move_{d}" for d in _DIRS),
    )
    program = Program(rules=tuple(rules), facts=tuple(facts), t_max=t_max)
    return GridScenario(
        program=program,
        config=config,
        constructors=constructors,
        side=side,
        agents=agents,
        actions=action_schedule,
    )
