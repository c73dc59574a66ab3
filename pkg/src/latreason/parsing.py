"""Text grammar for rules, facts, and intervals, plus serializers.

Rule lines look like::

    isAffiliatedTo(X,X0):[0.934,1] <-1 playsFor(X,X0):[0.1,1], Panathinaikos_F.C.(X0):[1,1]

    m_Down_on :: moveDown(A):[1,1] <-0 agent(A):[1,1], moveDir(A,down):[1,1]

An optional ``name ::`` prefix names the rule for traces.  Each body clause
may carry a threshold in braces, e.g. ``q(X,Y):[1,1] {>= count 2}``.  After
the clause list, the trailers ``skolem V=ctor(A,...)`` (comma-separated
bindings) and ``static`` may appear, in that order.

Fact lines::

    at(footPatrol,locMid):[1,1] @ [0,0]
    blocked(26):[1,1] @ [0,60] static

Inside rules, an unquoted identifier matching ``[A-Z][A-Za-z0-9_]*`` is a
variable; anything else (including quoted strings) is a constant.  Fact
atoms are ground, so every term there is a constant.
"""

from __future__ import annotations

import re
from typing import Optional

from .intervals import AnnConst, AnnFunc, AnnotationExpr, AnnVar, Interval
from .model import (
    Atom,
    AnnotatedLiteral,
    DEFAULT_THRESHOLD,
    Rule,
    SkolemBinding,
    TemporalFact,
    Threshold,
    Var,
    is_variable_token,
)

__all__ = [
    "ParseError",
    "parse_interval",
    "parse_rule",
    "parse_fact",
    "parse_rule_file",
    "parse_fact_file",
    "serialize_interval",
    "serialize_rule",
    "serialize_fact",
]


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}: {text!r}")
        self.pos = pos
        self.line = line
        self.column = col


_TOKEN_RE = re.compile(
    r"""
    \s*(
        ::|<-|>=|<=|[><=]|
        [()\[\]{},:@~]|
        "(?:[^"\\]|\\.)*"|
        [A-Za-z0-9_.\-]+
    )
    """,
    re.VERBOSE,
)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m:
                if text[pos:].strip():
                    raise ParseError("unexpected character", text, pos)
                break
            self.toks.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def next(self) -> str:
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of input", self.text, len(self.text))
        tok, _ = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.peek()
        if got != tok:
            raise ParseError(f"expected {tok!r}, found {got!r}", self.text, self.pos())
        self.i += 1

    def pos(self) -> int:
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    @property
    def done(self) -> bool:
        return self.i >= len(self.toks)


_NUM_RE = re.compile(r"^-?(\d+\.?\d*|\.\d+)$")


def _parse_number(ts: _Tokens) -> float:
    tok = ts.next()
    if not _NUM_RE.match(tok):
        raise ParseError(f"expected a number, found {tok!r}", ts.text, ts.pos())
    return float(tok)


def _parse_interval(ts: _Tokens) -> Interval:
    ts.expect("[")
    lo = _parse_number(ts)
    ts.expect(",")
    up = _parse_number(ts)
    ts.expect("]")
    try:
        iv = Interval(lo, up)
    except ValueError as e:
        raise ParseError(f"malformed interval: {e}", ts.text, ts.pos()) from None
    if not iv.is_valid:
        raise ParseError(f"malformed interval [{lo},{up}]: lower > upper", ts.text, ts.pos())
    return iv


def parse_interval(text: str) -> Interval:
    ts = _Tokens(text)
    iv = _parse_interval(ts)
    if not ts.done:
        raise ParseError("trailing input after interval", text, ts.pos())
    return iv


def _term_of(tok: str, ground_only: bool):
    if tok.startswith('"'):
        return tok[1:-1].replace('\\"', '"')
    if not ground_only and is_variable_token(tok):
        return Var(tok)
    return tok


def _parse_atom(ts: _Tokens, ground_only: bool) -> Atom:
    name = ts.next()
    if not re.match(r"^[A-Za-z0-9_.\-]+$", name):
        raise ParseError(f"expected a predicate name, found {name!r}", ts.text, ts.pos())
    ts.expect("(")
    args = [_term_of(ts.next(), ground_only)]
    while ts.peek() == ",":
        ts.next()
        args.append(_term_of(ts.next(), ground_only))
    ts.expect(")")
    if len(args) not in (1, 2):
        raise ParseError(f"predicate arity must be 1 or 2, got {len(args)}", ts.text, ts.pos())
    return Atom(name, tuple(args))


def _parse_threshold(ts: _Tokens) -> Threshold:
    ts.expect("{")
    cmp_tok = ts.next()
    if cmp_tok not in (">=", ">", "<=", "<", "="):
        raise ParseError(f"unknown comparator {cmp_tok!r}", ts.text, ts.pos())
    mode = ts.next()
    if mode not in ("count", "percent"):
        raise ParseError(f"threshold mode must be count or percent, found {mode!r}", ts.text, ts.pos())
    value = _parse_number(ts)
    ts.expect("}")
    return Threshold(cmp_tok, mode, value)


def _parse_head_annotation(ts: _Tokens) -> AnnotationExpr:
    if ts.peek() == "[":
        return AnnConst(_parse_interval(ts))
    name = ts.next()
    ts.expect("(")
    args: list[AnnotationExpr] = []
    while True:
        if ts.peek() == "[":
            args.append(AnnConst(_parse_interval(ts)))
        else:
            tok = ts.next()
            if not tok.isdigit():
                raise ParseError(
                    f"annotation argument must be a clause index or interval, found {tok!r}",
                    ts.text,
                    ts.pos(),
                )
            args.append(AnnVar(int(tok)))
        if ts.peek() == ",":
            ts.next()
            continue
        break
    ts.expect(")")
    return AnnFunc(name, tuple(args))


def _parse_clause(ts: _Tokens) -> tuple:
    negated = False
    if ts.peek() == "~":
        ts.next()
        negated = True
    atom = _parse_atom(ts, ground_only=False)
    ts.expect(":")
    iv = _parse_interval(ts)
    threshold = DEFAULT_THRESHOLD
    if ts.peek() == "{":
        threshold = _parse_threshold(ts)
    lit = AnnotatedLiteral(atom, AnnConst(iv), negated).normalized()
    return lit, threshold


def _parse_skolem_binding(ts: _Tokens) -> SkolemBinding:
    var_tok = ts.next()
    if not is_variable_token(var_tok):
        raise ParseError(f"skolem target must be a variable, found {var_tok!r}", ts.text, ts.pos())
    ts.expect("=")
    ctor = ts.next()
    ts.expect("(")
    args = [ts.next()]
    while ts.peek() == ",":
        ts.next()
        args.append(ts.next())
    ts.expect(")")
    arg_vars = []
    for a in args:
        if not is_variable_token(a):
            raise ParseError(f"skolem argument must be a variable, found {a!r}", ts.text, ts.pos())
        arg_vars.append(Var(a))
    return SkolemBinding(Var(var_tok), ctor, tuple(arg_vars))


def parse_rule(text: str) -> Rule:
    ts = _Tokens(text)
    name = ""
    if ts.i + 1 < len(ts.toks) and ts.toks[ts.i + 1][0] == "::":
        name = ts.next()
        ts.next()  # '::'
    negated = False
    if ts.peek() == "~":
        ts.next()
        negated = True
    head_atom = _parse_atom(ts, ground_only=False)
    ts.expect(":")
    head_ann = _parse_head_annotation(ts)
    ts.expect("<-")
    delay_tok = ts.next()
    if not delay_tok.isdigit():
        raise ParseError(f"expected a delay after '<-', found {delay_tok!r}", ts.text, ts.pos())
    delay = int(delay_tok)
    body = [_parse_clause(ts)]
    while ts.peek() == ",":
        ts.next()
        body.append(_parse_clause(ts))
    skolems: list[SkolemBinding] = []
    if ts.peek() == "skolem":
        ts.next()
        skolems.append(_parse_skolem_binding(ts))
        while ts.peek() == ",":
            ts.next()
            skolems.append(_parse_skolem_binding(ts))
    set_static = False
    if ts.peek() == "static":
        ts.next()
        set_static = True
    if not ts.done:
        raise ParseError(f"trailing input {ts.peek()!r}", ts.text, ts.pos())
    head = AnnotatedLiteral(head_atom, head_ann, negated)
    if negated and isinstance(head_ann, AnnConst):
        head = head.normalized()
    return Rule(
        head=head,
        body=tuple(body),
        delay=delay,
        set_static=set_static,
        name=name,
        skolems=tuple(skolems),
    )


def parse_fact(text: str) -> TemporalFact:
    ts = _Tokens(text)
    atom = _parse_atom(ts, ground_only=True)
    ts.expect(":")
    iv = _parse_interval(ts)
    ts.expect("@")
    ts.expect("[")
    t1 = int(_parse_number(ts))
    ts.expect(",")
    t2 = int(_parse_number(ts))
    ts.expect("]")
    static = False
    if ts.peek() == "static":
        ts.next()
        static = True
    if not ts.done:
        raise ParseError(f"trailing input {ts.peek()!r}", ts.text, ts.pos())
    if t1 < 0 or t2 < t1:
        raise ParseError(f"bad time range [{t1},{t2}]", text, len(text))
    return TemporalFact(atom, iv, t1, t2, static)


def _iter_statements(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_rule_file(text: str) -> list:
    rules = []
    for lineno, line in _iter_statements(text):
        try:
            rules.append(parse_rule(line))
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}", line, 0) from None
    return rules


def parse_fact_file(text: str) -> list:
    facts = []
    for lineno, line in _iter_statements(text):
        try:
            facts.append(parse_fact(line))
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}", line, 0) from None
    return facts


# ---------------------------------------------------------------------------
# Serialization (parse . serialize == identity, structurally)
# ---------------------------------------------------------------------------


def serialize_interval(iv: Interval) -> str:
    return str(iv)


def _serialize_term(term) -> str:
    if isinstance(term, Var):
        return term.name
    if is_variable_token(term):
        return f'"{term}"'
    return term


def _serialize_atom(atom: Atom) -> str:
    return f"{atom.predicate}({','.join(_serialize_term(a) for a in atom.args)})"


def _serialize_annotation(expr: AnnotationExpr) -> str:
    if isinstance(expr, AnnConst):
        return serialize_interval(expr.value)
    if isinstance(expr, AnnVar):
        return str(expr.index)
    return f"{expr.name}({','.join(_serialize_annotation(a) for a in expr.args)})"


def serialize_rule(rule: Rule) -> str:
    parts = []
    if rule.name:
        parts.append(f"{rule.name} :: ")
    head = rule.head
    parts.append(
        f"{'~' if head.negated else ''}{_serialize_atom(head.atom)}:"
        f"{_serialize_annotation(head.annotation)}"
    )
    parts.append(f" <-{rule.delay} ")
    clauses = []
    for lit, th in rule.body:
        s = f"{'~' if lit.negated else ''}{_serialize_atom(lit.atom)}:{_serialize_annotation(lit.annotation)}"
        if th != DEFAULT_THRESHOLD:
            s += f" {th}"
        clauses.append(s)
    parts.append(", ".join(clauses))
    if rule.skolems:
        binds = ", ".join(
            f"{sk.variable.name}={sk.constructor}({','.join(a.name for a in sk.args)})"
            for sk in rule.skolems
        )
        parts.append(f" skolem {binds}")
    if rule.set_static:
        parts.append(" static")
    return "".join(parts)


def serialize_fact(fact: TemporalFact) -> str:
    s = (
        f"{_serialize_atom(fact.atom)}:{serialize_interval(fact.annotation)}"
        f" @ [{fact.t_start},{fact.t_end}]"
    )
    if fact.static:
        s += " static"
    return s
