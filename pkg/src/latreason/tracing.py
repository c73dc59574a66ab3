"""Explainable rule traces.

Every annotation change is recorded with the rule (or fact, or
inconsistency resolution) that provoked it.  Export renders the table the
engine's users see: one row per change with columns
t / gamma / constant symbols / predicate / old / new / rule fired.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional

from .intervals import Interval
from .model import Subject

__all__ = ["FACT_SOURCE", "INCONSISTENCY_SOURCE", "TraceEntry", "TraceLog", "parse_trace"]

FACT_SOURCE = "--"
INCONSISTENCY_SOURCE = "inconsistency"

_COLUMNS = (
    "t",
    "gamma",
    "constant_symbols",
    "predicate",
    "old_annotation",
    "new_annotation",
    "rule_fired",
)


def format_subject(subject: Subject) -> str:
    if isinstance(subject, tuple):
        return f"({subject[0]},{subject[1]})"
    return subject


def parse_subject(text: str) -> Subject:
    if text.startswith("(") and text.endswith(")"):
        a, b = text[1:-1].split(",", 1)
        return (a, b)
    return text


@dataclass(frozen=True, slots=True)
class TraceEntry:
    t: int
    fp_step: int  # gamma application index within t; 0 for fact applications
    subject: Subject
    predicate: str
    old: Interval
    new: Interval
    source: str  # rule name, "--" for facts, or "inconsistency"
    grounding: Optional[tuple] = None  # ((var, const), ...) when atom tracing is on

    def as_row(self) -> tuple:
        return (
            str(self.t),
            str(self.fp_step),
            format_subject(self.subject),
            self.predicate,
            str(self.old),
            str(self.new),
            self.source,
        )


class TraceLog:
    """Append-only change history, optionally spilled to disk."""

    def __init__(self, spill_path: Optional[str] = None, memory_budget: Optional[int] = None):
        self.entries: list[TraceEntry] = []
        self._spill_path = spill_path
        self._budget = memory_budget
        self._spilled = 0

    def record(self, entry: TraceEntry) -> None:
        if entry.old.approx_eq(entry.new):
            raise ValueError("trace entries must describe a real change")
        self.entries.append(entry)
        if self._budget is not None and len(self.entries) > self._budget and self._spill_path:
            with open(self._spill_path, "a", encoding="utf-8") as fh:
                for e in self.entries:
                    fh.write(json.dumps(_entry_to_obj(e)) + "\n")
                self._spilled += len(self.entries)
            self.entries.clear()

    def __len__(self) -> int:
        return self._spilled + len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def export(self, fmt: str = "tsv") -> bytes:
        if fmt == "tsv":
            return self._export_delimited("\t")
        if fmt == "csv":
            return self._export_delimited(",")
        if fmt == "json-lines":
            out = io.StringIO()
            for e in self.entries:
                out.write(json.dumps(_entry_to_obj(e)) + "\n")
            return out.getvalue().encode("utf-8")
        raise ValueError(f"unknown trace format {fmt!r}")

    def _export_delimited(self, sep: str) -> bytes:
        out = io.StringIO()
        if sep == ",":
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(_COLUMNS)
            for e in self.entries:
                writer.writerow(e.as_row())
        else:
            out.write(sep.join(_COLUMNS) + "\n")
            for e in self.entries:
                out.write(sep.join(e.as_row()) + "\n")
        return out.getvalue().encode("utf-8")


def _entry_to_obj(e: TraceEntry) -> dict:
    obj = {
        "t": e.t,
        "gamma": e.fp_step,
        "constant_symbols": format_subject(e.subject),
        "predicate": e.predicate,
        "old_annotation": str(e.old),
        "new_annotation": str(e.new),
        "rule_fired": e.source,
    }
    if e.grounding is not None:
        obj["grounding"] = {k: v for k, v in e.grounding}
    return obj


def _interval_of(text: str) -> Interval:
    lo, up = text.strip()[1:-1].split(",")
    return Interval(float(lo), float(up))


def _entry_from_obj(obj: dict) -> TraceEntry:
    grounding = None
    if "grounding" in obj and obj["grounding"] is not None:
        grounding = tuple(sorted(obj["grounding"].items()))
    return TraceEntry(
        t=int(obj["t"]),
        fp_step=int(obj["gamma"]),
        subject=parse_subject(obj["constant_symbols"]),
        predicate=obj["predicate"],
        old=_interval_of(obj["old_annotation"]),
        new=_interval_of(obj["new_annotation"]),
        source=obj["rule_fired"],
        grounding=grounding,
    )


def parse_trace(data: bytes, fmt: str = "tsv") -> list:
    """Re-read an exported trace into entries (round-trips export)."""
    text = data.decode("utf-8")
    entries: list[TraceEntry] = []
    if fmt == "json-lines":
        for line in text.splitlines():
            if line.strip():
                entries.append(_entry_from_obj(json.loads(line)))
        return entries
    if fmt == "tsv":
        rows = [line.split("\t") for line in text.splitlines() if line]
    elif fmt == "csv":
        rows = [row for row in csv.reader(io.StringIO(text)) if row]
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    header, rows = rows[0], rows[1:]
    if tuple(header) != _COLUMNS:
        raise ValueError(f"unexpected trace header {header!r}")
    for row in rows:
        entries.append(_entry_from_obj(dict(zip(_COLUMNS, row))))
    return entries
