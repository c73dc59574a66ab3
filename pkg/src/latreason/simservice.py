"""Step-based simulation service over newline-delimited JSON.

External processes load a scenario (rules + graph + facts), inject action
facts, advance time, and read back trace deltas and observations; the
engine acts as the environment.  One request, one response, strictly
ordered; a session lives per connection (TCP) or per process (stdio).

Requests::

    {"cmd":"load","rules":[...],"facts":[...],"graph":{...}|null,"config":{...}}
    {"cmd":"load","builtin":"evasion","config":{...overrides}}
    {"cmd":"reset"}
    {"cmd":"set_facts","facts":["moveDir(red-agent-1,down):[1,1]", ...]}
    {"cmd":"step","n":1}
    {"cmd":"query","atom":"c(x)","interval":[1,1],"t":2,"negated":false}
    {"cmd":"close"}

Responses are ``{"ok":true,...}`` or ``{"ok":false,"error":"..."}``.  Step
responses carry ``trace`` (the entries the step generated), ``observations``
(current non-bottom atoms filtered to the declared observation predicates),
and ``terminal`` (null, or ``{"outcome":...}`` once a terminal atom holds).
"""

from __future__ import annotations

import json
import socketserver
import sys
from typing import Optional

from .engine import Engine, EngineConfig
from .graphio import GraphDocument, load_graph
from .grounding import constructor_from_spec
from .intervals import TRUE, Interval, leq, negate
from .model import Program
from .parsing import ParseError, parse_fact, parse_rule
from .tracing import format_subject

__all__ = ["SimSession", "serve_tcp", "serve_stdio"]

_CONFIG_KEYS = {
    "t_max",
    "persistent",
    "static_graph_facts",
    "ad_hoc_grounding",
    "parallel",
    "workers",
    "atom_trace",
    "verbose",
    "max_fp_iterations",
    "abort_on_inconsistency",
    "inconsistency_mode",
    "quantize_decimals",
}

TERMINAL_PREDICATE = "terminal"


class SessionError(ValueError):
    pass


def _builtin_world(name: str):
    from .scenarios import gridworld

    if name == "evasion":
        return gridworld.evasion_world()
    if name == "minigrid":
        return gridworld.minigrid_world()
    raise SessionError(f"unknown builtin scenario {name!r}")


class SimSession:
    """One episode-capable engine behind the wire protocol."""

    def __init__(self):
        self.engine: Optional[Engine] = None
        self._load_msg: Optional[dict] = None
        self.action_predicates: Optional[set] = None
        self.observation_predicates: Optional[set] = None
        self._staged: list = []
        self._last_actions: list = []
        self.closed = False

    # -- protocol entry point -------------------------------------------------

    def handle(self, message: dict) -> dict:
        try:
            cmd = message.get("cmd")
            if cmd == "load":
                return self._cmd_load(message)
            if cmd == "reset":
                return self._cmd_reset()
            if cmd == "set_facts":
                return self._cmd_set_facts(message)
            if cmd == "step":
                return self._cmd_step(message)
            if cmd == "query":
                return self._cmd_query(message)
            if cmd == "close":
                self.closed = True
                return {"ok": True, "bye": True}
            raise SessionError(f"unknown command {cmd!r}")
        except (SessionError, ParseError, ValueError, KeyError) as e:
            return {"ok": False, "error": str(e)}

    # -- commands ---------------------------------------------------------------

    def _cmd_load(self, message: dict) -> dict:
        self._load_msg = message
        self._start_engine()
        return {
            "ok": True,
            "t": self.engine.current_t,
            "observations": self._observations(),
            "terminal": self._terminal(),
            "actions": sorted(self.action_predicates or ()),
        }

    def _start_engine(self) -> None:
        message = self._load_msg
        config_obj = dict(message.get("config") or {})
        action_preds = set(config_obj.pop("action_predicates", ()) or ())
        obs_preds = config_obj.pop("observation_predicates", None)
        ctor_specs = config_obj.pop("constructors", ()) or ()
        ipl = tuple(tuple(p) for p in config_obj.pop("ipl", ()) or ())
        volatile = set(config_obj.pop("volatile_predicates", ()) or ())

        if "builtin" in message:
            world = _builtin_world(message["builtin"])
            from .scenarios import gridworld

            program = world.program()
            base = world.config()
            constructors = world.constructors()
            action_preds = action_preds or set(gridworld.ACTION_PREDICATES)
            if obs_preds is None:
                obs_preds = sorted(gridworld.OBSERVATION_PREDICATES)
            settings = {
                "t_max": base.t_max,
                "persistent": base.persistent,
                "ad_hoc_grounding": base.ad_hoc_grounding,
                "inconsistency_mode": base.inconsistency_mode,
                "volatile_predicates": base.volatile_predicates | frozenset(volatile),
            }
            unknown = set(config_obj) - _CONFIG_KEYS
            if unknown:
                raise SessionError(f"unknown config keys: {sorted(unknown)}")
            settings.update(config_obj)
            settings["volatile_predicates"] = frozenset(settings["volatile_predicates"]) | frozenset(
                action_preds
            )
            config = EngineConfig(**settings)
        else:
            unknown = set(config_obj) - _CONFIG_KEYS
            if unknown:
                raise SessionError(f"unknown config keys: {sorted(unknown)}")
            rules = tuple(parse_rule(r) for r in message.get("rules", ()))
            facts = [parse_fact(f) for f in message.get("facts", ())]
            t_max = int(config_obj.get("t_max", 0))
            nodes: frozenset = frozenset()
            edges: frozenset = frozenset()
            graph = message.get("graph")
            if graph:
                doc = GraphDocument(
                    nodes=[(n["id"], dict(n.get("attrs", {}))) for n in graph.get("nodes", ())],
                    edges=[
                        (e["source"], e["target"], dict(e.get("attrs", {})))
                        for e in graph.get("edges", ())
                    ],
                )
                constants, gfacts, gedges = load_graph(
                    doc,
                    t_max=t_max,
                    static=bool(config_obj.get("static_graph_facts", False)),
                    node_id_labels=bool(graph.get("node_id_labels", False)),
                )
                facts.extend(gfacts)
                nodes = frozenset(constants)
                edges = frozenset(gedges)
            program = Program(
                rules=rules, facts=tuple(facts), ipl=ipl, t_max=t_max, nodes=nodes, edges=edges
            )
            constructors = {spec["name"]: constructor_from_spec(spec) for spec in ctor_specs}
            config_obj["volatile_predicates"] = frozenset(volatile) | frozenset(action_preds)
            config = EngineConfig(**config_obj)

        self.action_predicates = action_preds
        self.observation_predicates = set(obs_preds) if obs_preds is not None else None
        self._staged = []
        self.engine = Engine(program, config, constructors)
        self.engine.step_time()  # process t=0: the initial state

    def _cmd_reset(self) -> dict:
        if self._load_msg is None:
            raise SessionError("reset before load")
        self._start_engine()
        return {
            "ok": True,
            "t": self.engine.current_t,
            "observations": self._observations(),
            "terminal": self._terminal(),
        }

    def _require_engine(self) -> Engine:
        if self.engine is None:
            raise SessionError("no scenario loaded")
        return self.engine

    def _cmd_set_facts(self, message: dict) -> dict:
        engine = self._require_engine()
        target = engine.current_t + 1
        if target > engine.config.t_max:
            raise SessionError(f"episode horizon t_max={engine.config.t_max} reached")
        staged = []
        for text in message.get("facts", ()):
            if "@" not in text:
                text = f"{text} @ [{target},{target}]"
            fact = parse_fact(text)
            if fact.t_start != target or fact.t_end != target:
                raise SessionError(
                    f"action facts must target the next time point {target}, got "
                    f"[{fact.t_start},{fact.t_end}]"
                )
            if self.action_predicates and fact.atom.predicate not in self.action_predicates:
                raise SessionError(
                    f"predicate {fact.atom.predicate!r} is not a declared action"
                )
            staged.append(fact)
        for fact in staged:
            engine.inject_fact(fact)
        self._staged.extend(staged)
        return {"ok": True, "staged": len(self._staged)}

    def _cmd_step(self, message: dict) -> dict:
        engine = self._require_engine()
        n = int(message.get("n", 1))
        if n < 1:
            raise SessionError("step count must be >= 1")
        if engine.current_t + n > engine.config.t_max:
            raise SessionError(
                f"stepping past the episode horizon t_max={engine.config.t_max}"
            )
        mark = len(engine.trace.entries)
        for _ in range(n):
            engine.step_time()
        self._staged = []
        new_entries = engine.trace.entries[mark:]
        return {
            "ok": True,
            "t": engine.current_t,
            "trace": [self._entry_obj(e) for e in new_entries],
            "observations": self._observations(),
            "terminal": self._terminal(),
        }

    def _cmd_query(self, message: dict) -> dict:
        engine = self._require_engine()
        atom_text = message["atom"]
        lo, up = message["interval"]
        t = int(message["t"])
        negated = bool(message.get("negated", False))
        fact = parse_fact(f"{atom_text}:[1,1] @ [0,0]")  # reuse the atom grammar
        if not (0 <= t <= engine.current_t):
            raise SessionError(f"time {t} has not been computed yet")
        if engine.cap_exceeded or engine.inconsistent_abort:
            raise SessionError("entailment is only defined on a converged run")
        mu = Interval(lo, up)
        value = None
        subject = fact.atom.subject()
        for s, p, iv, _static in engine.history[t]:
            if s == subject and p == fact.atom.predicate:
                value = iv
                break
        if value is None:
            from .intervals import BOTTOM

            value = BOTTOM
        if negated:
            value = negate(value)
        return {"ok": True, "entailed": leq(mu, value)}

    # -- response building -------------------------------------------------------

    def _entry_obj(self, e) -> dict:
        return {
            "t": e.t,
            "gamma": e.fp_step,
            "subject": format_subject(e.subject),
            "predicate": e.predicate,
            "old": [e.old.lower, e.old.upper],
            "new": [e.new.lower, e.new.upper],
            "rule": e.source,
        }

    def _observations(self) -> list:
        engine = self._require_engine()
        out = []
        for subject, pred, iv, static in engine.store.dump_rows():
            if self.observation_predicates is not None and pred not in self.observation_predicates:
                continue
            out.append(
                {
                    "subject": format_subject(subject),
                    "predicate": pred,
                    "bounds": [iv.lower, iv.upper],
                    "static": static,
                }
            )
        return out

    def _terminal(self) -> Optional[dict]:
        engine = self._require_engine()
        for (subject, pred), (iv, _static) in engine.store.entries.items():
            if pred == TERMINAL_PREDICATE and leq(TRUE, iv) and isinstance(subject, str):
                return {"outcome": subject}
        return None


# ---------------------------------------------------------------------------
# Transports
# ---------------------------------------------------------------------------


def _serve_stream(session: SimSession, rfile, wfile) -> None:
    text_out = hasattr(wfile, "encoding")  # sys.stdout vs a socket's buffered writer
    for raw in rfile:
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError as e:
            response = {"ok": False, "error": f"bad json: {e}"}
        else:
            response = session.handle(message)
        payload = json.dumps(response) + "\n"
        wfile.write(payload if text_out else payload.encode("utf-8"))
        wfile.flush()
        if session.closed:
            break


def serve_stdio() -> None:
    """One session over stdin/stdout, one JSON object per line."""
    session = SimSession()
    _serve_stream(session, sys.stdin, sys.stdout)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        session = SimSession()
        _serve_stream(session, self.rfile, self.wfile)


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


def serve_tcp(host: str = "127.0.0.1", port: int = 8765, ready_callback=None):
    """Serve sessions over TCP; one independent session per connection."""
    server = _Server((host, port), _Handler)
    if ready_callback is not None:
        ready_callback(server.server_address)
    try:
        server.serve_forever()
    finally:
        server.server_close()
