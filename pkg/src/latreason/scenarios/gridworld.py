"""Two-team grid-war world driven entirely by rules.

Cells are numbered row-major from the bottom-left corner.  Agents move via
immediate flag rules (an injected ``moveDir`` action turns ``moveDown`` on
when the target cell is not blocked, which is where shielding lives), and
delayed rules update ``atLoc`` one step later.  Shooting spawns a bullet
entity on demand; bullets fly one cell per step in their direction.

Run with persistence and override-on-contradiction: the on/off flag dance
(``[1,1] -> [0,0]`` and back) is destructive update, not refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..engine import Engine, EngineConfig
from ..grounding import replace_constructor
from ..intervals import FALSE, TRUE
from ..model import Atom, Program, TemporalFact
from ..parsing import parse_rule

__all__ = [
    "GridWorld",
    "build_gridworld",
    "EVASION_WORLD",
    "evasion_world",
    "evasion_script",
    "EVASION_EVENTS",
    "MINIGRID_WORLD",
    "minigrid_world",
]

_DIRS = {
    "down": -1,  # row below
    "up": +1,
    "left": -1,  # column to the left
    "right": +1,
}

ACTION_PREDICATES = frozenset({"moveDir", "shootLeft"})
OBSERVATION_PREDICATES = frozenset({"atLoc", "direction", "terminal"})


def _neighbor(cell: int, direction: str, side: int):
    x, y = cell % side, cell // side
    if direction == "down":
        y -= 1
    elif direction == "up":
        y += 1
    elif direction == "left":
        x -= 1
    else:
        x += 1
    if 0 <= x < side and 0 <= y < side:
        return y * side + x
    return None


def _rules() -> list:
    rules = []
    # Movement flags: immediate, shielded by the blocked guard on the target.
    for d in _DIRS:
        cap = d.capitalize()
        rules.append(parse_rule(
            f"m_{cap}_on :: move{cap}(A):[1,1] <-0 agent(A):[1,1], moveDir(A,{d}):[1,1], "
            f"atLoc(A,X):[1,1], {d}Loc(Y,X):[1,1], blocked(Y):[0,0]"
        ))
    for d in _DIRS:
        cap = d.capitalize()
        rules.append(parse_rule(
            f"m_{cap}_off :: move{cap}(A):[0,0] <-1 move{cap}(A):[1,1]"
        ))
    # Location updates one step after a move flag turns on.
    for d in _DIRS:
        cap = d.capitalize()
        rules.append(parse_rule(
            f"m_Set_location :: atLoc(A,Y):[1,1] <-1 move{cap}(A):[1,1], "
            f"atLoc(A,X):[1,1], {d}Loc(Y,X):[1,1]"
        ))
    for d in _DIRS:
        cap = d.capitalize()
        rules.append(parse_rule(
            f"m_Rem_location :: atLoc(A,X):[0,0] <-1 move{cap}(A):[1,1], atLoc(A,X):[1,1]"
        ))
    # Shooting (left only, as the trace exercises): flag, bullet spawn with
    # its direction, then flight.  Spawns key off the one-shot action so a
    # bullet appears exactly once.
    rules.append(parse_rule(
        "s_Left_on :: shootLeftB(A):[1,1] <-0 agent(A):[1,1], team(A,blue):[1,1], "
        "health(A):[0.1,1], ammo(A):[0.1,1], shootLeft(A):[1,1]"
    ))
    rules.append(parse_rule(
        "s_Left_off :: shootLeftB(A):[0,0] <-1 shootLeftB(A):[1,1]"
    ))
    rules.append(parse_rule(
        "s_Set_dir :: direction(B,left):[1,1] <-0 agent(A):[1,1], team(A,blue):[1,1], "
        "health(A):[0.1,1], ammo(A):[0.1,1], shootLeft(A):[1,1] skolem B=bulletOf(A)"
    ))
    rules.append(parse_rule(
        "s_Set_location :: atLoc(B,Y):[1,1] <-0 agent(A):[1,1], team(A,blue):[1,1], "
        "health(A):[0.1,1], ammo(A):[0.1,1], shootLeft(A):[1,1], atLoc(A,X):[1,1], "
        "leftLoc(Y,X):[1,1] skolem B=bulletOf(A)"
    ))
    rules.append(parse_rule(
        "s_Set_location :: atLoc(B,Y):[1,1] <-1 direction(B,left):[1,1], "
        "atLoc(B,X):[1,1], leftLoc(Y,X):[1,1]"
    ))
    rules.append(parse_rule(
        "s_Rem_location :: atLoc(B,X):[0,0] <-1 direction(B,left):[1,1], atLoc(B,X):[1,1]"
    ))
    # A team wins by standing on the rival base.
    rules.append(parse_rule(
        "t_Capture :: terminal(T):[1,1] <-0 team(A,T):[1,1], atLoc(A,X):[1,1], "
        "rivalBase(X,T):[1,1]"
    ))
    return rules


@dataclass
class GridWorld:
    side: int
    obstacles: tuple
    agents: dict  # name -> (team, start cell)
    bases: dict  # team -> base cell
    t_max: int

    def program(self) -> Program:
        facts = []
        for cell in range(self.side * self.side):
            blocked = cell in self.obstacles
            facts.append(TemporalFact(
                Atom("blocked", (str(cell),)), TRUE if blocked else FALSE, 0, 0, True
            ))
            for d in _DIRS:
                n = _neighbor(cell, d, self.side)
                if n is not None:
                    facts.append(TemporalFact(
                        Atom(f"{d}Loc", (str(n), str(cell))), TRUE, 0, 0, True
                    ))
        for name, (team, cell) in self.agents.items():
            facts.append(TemporalFact(Atom("agent", (name,)), TRUE, 0, 0, True))
            facts.append(TemporalFact(Atom("team", (name, team)), TRUE, 0, 0, True))
            facts.append(TemporalFact(Atom("health", (name,)), TRUE, 0, 0, True))
            facts.append(TemporalFact(Atom("ammo", (name,)), TRUE, 0, 0, True))
            facts.append(TemporalFact(Atom("atLoc", (name, str(cell))), TRUE, 0, 0, False))
            for d in _DIRS:
                facts.append(TemporalFact(
                    Atom(f"move{d.capitalize()}", (name,)), FALSE, 0, 0, False
                ))
        for team, cell in self.bases.items():
            rival = "blue" if team == "red" else "red"
            facts.append(TemporalFact(
                Atom("rivalBase", (str(cell), rival)), TRUE, 0, 0, True
            ))
        return Program(rules=tuple(_rules()), facts=tuple(facts), t_max=self.t_max)

    def config(self, **overrides) -> EngineConfig:
        settings = dict(
            t_max=self.t_max,
            persistent=True,
            ad_hoc_grounding=True,
            inconsistency_mode="override",
            volatile_predicates=frozenset(ACTION_PREDICATES),
        )
        settings.update(overrides)
        return EngineConfig(**settings)

    def constructors(self) -> dict:
        return {"bulletOf": replace_constructor("agent", "bullet")}

    def engine(self, **overrides) -> Engine:
        return Engine(self.program(), self.config(**overrides), self.constructors())


def build_gridworld(side, obstacles, agents, bases, t_max) -> GridWorld:
    return GridWorld(side, tuple(obstacles), dict(agents), dict(bases), t_max)


def evasion_world(t_max: int = 25) -> GridWorld:
    """The 8x8 evasion episode: red walks the western column down from
    24, blue waits at 4, obstacles sit at 26 and 27."""
    return build_gridworld(
        side=8,
        obstacles=(26, 27),
        agents={"red-agent-1": ("red", 24), "blue-agent-1": ("blue", 4)},
        bases={"red": 7, "blue": 56},
        t_max=t_max,
    )


EVASION_WORLD = evasion_world


def evasion_script() -> list:
    """Actions per absolute time point reproducing the t=16..21 dynamics."""
    return [
        (16, [("moveDir", ("red-agent-1", "down"))]),
        (17, [("moveDir", ("red-agent-1", "down"))]),
        (18, [("moveDir", ("red-agent-1", "down")), ("shootLeft", ("blue-agent-1",))]),
        (19, [("moveDir", ("red-agent-1", "up"))]),
        (20, [("moveDir", ("red-agent-1", "up"))]),
    ]


# The reference event set for the evasion episode (t=16..21):
# move cascade down, the shot and bullet flight, then the backtrack.
EVASION_EVENTS = [
    (16, "red-agent-1", "moveDown", "[0.0,0.0]", "[1.0,1.0]", "m_Down_on"),
    (17, "red-agent-1", "moveDown", "[1.0,1.0]", "[0.0,0.0]", "m_Down_off"),
    (17, ("red-agent-1", "16"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "m_Set_location"),
    (17, ("red-agent-1", "24"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "m_Rem_location"),
    (17, "red-agent-1", "moveDown", "[0.0,0.0]", "[1.0,1.0]", "m_Down_on"),
    (18, "red-agent-1", "moveDown", "[1.0,1.0]", "[0.0,0.0]", "m_Down_off"),
    (18, ("red-agent-1", "8"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "m_Set_location"),
    (18, ("red-agent-1", "16"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "m_Rem_location"),
    (18, "blue-agent-1", "shootLeftB", "[0.0,1.0]", "[1.0,1.0]", "s_Left_on"),
    (18, ("blue-bullet-1", "3"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "s_Set_location"),
    (18, ("blue-bullet-1", "left"), "direction", "[0.0,1.0]", "[1.0,1.0]", "s_Set_dir"),
    (18, "red-agent-1", "moveDown", "[0.0,0.0]", "[1.0,1.0]", "m_Down_on"),
    (19, "red-agent-1", "moveDown", "[1.0,1.0]", "[0.0,0.0]", "m_Down_off"),
    (19, ("red-agent-1", "0"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "m_Set_location"),
    (19, ("red-agent-1", "8"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "m_Rem_location"),
    (19, "blue-agent-1", "shootLeftB", "[1.0,1.0]", "[0.0,0.0]", "s_Left_off"),
    (19, ("blue-bullet-1", "3"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "s_Rem_location"),
    (19, ("blue-bullet-1", "2"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "s_Set_location"),
    (19, "red-agent-1", "moveUp", "[0.0,0.0]", "[1.0,1.0]", "m_Up_on"),
    (20, "red-agent-1", "moveUp", "[1.0,1.0]", "[0.0,0.0]", "m_Up_off"),
    (20, ("red-agent-1", "8"), "atLoc", "[0.0,0.0]", "[1.0,1.0]", "m_Set_location"),
    (20, ("red-agent-1", "0"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "m_Rem_location"),
    (20, ("blue-bullet-1", "2"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "s_Rem_location"),
    (20, ("blue-bullet-1", "1"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "s_Set_location"),
    (20, "red-agent-1", "moveUp", "[0.0,0.0]", "[1.0,1.0]", "m_Up_on"),
    (21, "red-agent-1", "moveUp", "[1.0,1.0]", "[0.0,0.0]", "m_Up_off"),
    (21, ("red-agent-1", "16"), "atLoc", "[0.0,0.0]", "[1.0,1.0]", "m_Set_location"),
    (21, ("red-agent-1", "8"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "m_Rem_location"),
    (21, ("blue-bullet-1", "1"), "atLoc", "[1.0,1.0]", "[0.0,0.0]", "s_Rem_location"),
    (21, ("blue-bullet-1", "0"), "atLoc", "[0.0,1.0]", "[1.0,1.0]", "s_Set_location"),
]


def minigrid_world(t_max: int = 6) -> GridWorld:
    """The 4x4 example grid with an obstacle in cell 5 (shielding demo)."""
    return build_gridworld(
        side=4,
        obstacles=(5,),
        agents={"red-agent-1": ("red", 9), "blue-agent-1": ("blue", 15)},
        bases={"red": 3, "blue": 12},
        t_max=t_max,
    )
