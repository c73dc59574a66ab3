"""Knowledge-graph ingestion: GraphML files, triple files, and in-memory docs.

Entities become constants, relations become predicates.  A node attribute
``(p, v)`` becomes the unary fact ``p(node):[v,v]`` over the full time
range; an edge attribute becomes the matching binary fact.  Boolean values
map to [1,1]/[0,0].
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx

from .intervals import FALSE, Interval, TRUE
from .model import Atom, TemporalFact

__all__ = [
    "GraphDocument",
    "GraphIngestError",
    "load_graph",
    "read_graphml",
    "read_triples",
    "graph_from_triples",
]


class GraphIngestError(ValueError):
    pass


@dataclass
class GraphDocument:
    """Plain nodes-and-edges view of a knowledge graph."""

    nodes: list = field(default_factory=list)  # of (id, {attr: value})
    edges: list = field(default_factory=list)  # of (source, target, {attr: value})


def _attr_interval(name: str, value, where: str) -> Interval:
    if isinstance(value, bool):
        return TRUE if value else FALSE
    if isinstance(value, str):
        low = value.strip().lower()
        if low in ("true", "false"):
            return TRUE if low == "true" else FALSE
        try:
            value = float(value)
        except ValueError:
            raise GraphIngestError(f"non-numeric attribute {name}={value!r} on {where}")
    if isinstance(value, (int, float)):
        v = float(value)
        if not (0.0 <= v <= 1.0):
            raise GraphIngestError(f"attribute {name}={v} on {where} outside [0,1]")
        return Interval(v, v)
    raise GraphIngestError(f"non-numeric attribute {name}={value!r} on {where}")


def load_graph(
    doc: GraphDocument,
    t_max: int = 0,
    static: bool = False,
    node_id_labels: bool = False,
):
    """Turn a graph document into (constants, facts, edges).

    Every attribute yields exactly one fact valid over [0, t_max], marked
    static when ``static`` is set (the `static_graph_facts` setting).  With
    ``node_id_labels`` each node additionally acts as a unary predicate
    naming itself (``n(n):[1,1]``), which entity-anchored rules rely on;
    off by default so the fact count stays #node-attrs + #edge-attrs.
    """
    constants: set = set()
    facts: list[TemporalFact] = []
    edge_set: set = set()
    for node_id, attrs in doc.nodes:
        node = str(node_id)
        constants.add(node)
        for name, value in sorted(attrs.items()):
            iv = _attr_interval(name, value, f"node {node}")
            facts.append(TemporalFact(Atom(name, (node,)), iv, 0, t_max, static))
    for src, tgt, attrs in doc.edges:
        s, t = str(src), str(tgt)
        if s not in constants or t not in constants:
            raise GraphIngestError(f"edge ({s},{t}) references an undeclared node")
        edge_set.add((s, t))
        for name, value in sorted(attrs.items()):
            iv = _attr_interval(name, value, f"edge ({s},{t})")
            facts.append(TemporalFact(Atom(name, (s, t)), iv, 0, t_max, static))
    if node_id_labels:
        for node in sorted(constants):
            facts.append(TemporalFact(Atom(node, (node,)), TRUE, 0, t_max, static))
    return constants, facts, edge_set


def read_graphml(source) -> GraphDocument:
    """Read standard GraphML (path, file object, or XML string)."""
    if isinstance(source, str) and source.lstrip().startswith("<"):
        g = nx.read_graphml(io.BytesIO(source.encode("utf-8")))
    else:
        g = nx.read_graphml(source)
    doc = GraphDocument()
    for node, attrs in g.nodes(data=True):
        doc.nodes.append((str(node), dict(attrs)))
    for src, tgt, attrs in g.edges(data=True):
        doc.edges.append((str(src), str(tgt), dict(attrs)))
    return doc


def read_triples(source) -> GraphDocument:
    """Read a UTF-8 triple file: one ``entity1<TAB>relation<TAB>entity2`` per line."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    return graph_from_triples(
        tuple(line.split("\t")) for line in text.splitlines() if line.strip()
    )


def graph_from_triples(triples: Iterable) -> GraphDocument:
    doc = GraphDocument()
    seen: set = set()
    for parts in triples:
        if len(parts) != 3:
            raise GraphIngestError(f"expected e1<TAB>rel<TAB>e2, got {parts!r}")
        e1, rel, e2 = (p.strip() for p in parts)
        for e in (e1, e2):
            if e not in seen:
                seen.add(e)
                doc.nodes.append((e, {}))
        doc.edges.append((e1, e2, {rel: 1.0}))
    return doc
