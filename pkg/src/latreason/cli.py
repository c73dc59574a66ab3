"""Command-line entry point.

Subcommands: ``run`` a program (graph + rules + facts) and write the trace,
interpretation dump, and growth stats; ``kg-eval`` a completion task;
``bound-report`` turn a stats CSV into a per-step growth-vs-bound table;
``serve`` the step-based simulation service.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .engine import EngineConfig, RunStatus, run
from .graphio import GraphDocument, load_graph, read_graphml, read_triples
from .grounding import constructor_from_spec
from .kgeval import Query, compare_steps
from .model import Program
from .parsing import ParseError, parse_fact_file, parse_rule_file

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INCONSISTENT = 2
EXIT_CAP_EXCEEDED = 3


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tmax", type=int, default=0, help="last time point to compute")
    p.add_argument("--persistent", action="store_true",
                   help="carry annotations across time points instead of resetting")
    p.add_argument("--static-graph-facts", action="store_true",
                   help="pin graph-derived facts so rules cannot change them")
    sk = p.add_mutually_exclusive_group()
    sk.add_argument("--skolemize", dest="skolemize", action="store_true", default=True,
                    help="create constants/edges on demand (default)")
    sk.add_argument("--no-skolemize", dest="skolemize", action="store_false",
                    help="only ever touch pre-grounded constants")
    p.add_argument("--parallel", action="store_true",
                   help="ground rules across worker threads (LATREASON_THREADS caps them)")
    p.add_argument("--atom-trace", action="store_true",
                   help="record the grounding constants behind every change")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--max-fp-iter", type=int, default=100,
                   help="fixpoint applications allowed per time point")
    p.add_argument("--abort-on-inconsistency", action="store_true",
                   help="stop the run on the first contradiction")
    p.add_argument("--inconsistency-mode", choices=["resolve", "override", "abort"],
                   default="resolve", help="what a contradicting update does")
    p.add_argument("--quantize", type=int, default=None, metavar="DECIMALS",
                   help="round annotations; enables the finite convergence cap")
    p.add_argument("--volatile", default="", metavar="PREDS",
                   help="comma-separated predicates reset every step even when persistent")
    p.add_argument("--constructors", default=None, metavar="JSON",
                   help="JSON file of constructor specs for skolemized rules")


def _config_from_args(args) -> EngineConfig:
    return EngineConfig(
        t_max=args.tmax,
        persistent=args.persistent,
        static_graph_facts=args.static_graph_facts,
        ad_hoc_grounding=args.skolemize,
        parallel=args.parallel,
        atom_trace=args.atom_trace,
        verbose=args.verbose,
        max_fp_iterations=args.max_fp_iter,
        abort_on_inconsistency=args.abort_on_inconsistency,
        inconsistency_mode=args.inconsistency_mode,
        quantize_decimals=args.quantize,
        volatile_predicates=frozenset(
            p.strip() for p in args.volatile.split(",") if p.strip()
        ),
    )


def _read_graph_file(path: str) -> GraphDocument:
    if path.endswith((".graphml", ".xml")):
        return read_graphml(path)
    return read_triples(path)


def _load_constructors(path):
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        specs = json.load(fh)
    return {spec["name"]: constructor_from_spec(spec) for spec in specs}


def cmd_run(args) -> int:
    try:
        rules = []
        if args.rules:
            with open(args.rules, encoding="utf-8") as fh:
                rules = parse_rule_file(fh.read())
        facts = []
        if args.facts:
            with open(args.facts, encoding="utf-8") as fh:
                facts = parse_fact_file(fh.read())
        nodes, edges = frozenset(), frozenset()
        if args.graph:
            doc = _read_graph_file(args.graph)
            constants, gfacts, gedges = load_graph(
                doc,
                t_max=args.tmax,
                static=args.static_graph_facts,
                node_id_labels=args.node_id_labels,
            )
            facts.extend(gfacts)
            nodes, edges = frozenset(constants), frozenset(gedges)
        constructors = _load_constructors(args.constructors)
        program = Program(
            rules=tuple(rules), facts=tuple(facts), t_max=args.tmax,
            nodes=nodes, edges=edges,
        )
        config = _config_from_args(args)
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        result = run(program, config, constructors)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "trace.tsv"), "wb") as fh:
        fh.write(result.trace.export("tsv"))
    with open(os.path.join(args.out_dir, "interpretation.tsv"), "w", encoding="utf-8") as fh:
        fh.write(result.dump_tsv())
    with open(os.path.join(args.out_dir, "stats.csv"), "w", encoding="utf-8") as fh:
        fh.write(result.stats_csv())
    print(f"{result.status.value}: {len(result.trace.entries)} trace entries, "
          f"{len(result.store.ever)} atoms materialized, outputs in {args.out_dir}")
    if result.status is RunStatus.INCONSISTENT:
        return EXIT_INCONSISTENT
    if result.status is RunStatus.CAP_EXCEEDED:
        return EXIT_CAP_EXCEEDED
    return EXIT_OK


def cmd_kg_eval(args) -> int:
    try:
        doc = _read_graph_file(args.graph)
        with open(args.rules, encoding="utf-8") as fh:
            rules = parse_rule_file(fh.read())
        queries = []
        with open(args.test, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                e1, rel, e2 = line.rstrip("\n").split("\t")
                if args.direction == "tail":
                    queries.append(Query(e1, rel, e2, "tail"))
                else:
                    queries.append(Query(e2, rel, e1, "head"))
        steps = sorted(int(s) for s in args.steps.split(","))
        k_values = tuple(int(k) for k in args.k.split(","))
    except (OSError, ParseError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    metrics = compare_steps(
        doc, rules, queries, steps, k_values=k_values, filtered=args.filtered
    )
    fieldnames = list(metrics[0].as_row(k_values))
    rows = [m.as_row(k_values) for m in metrics]
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(rows)
    widths = {f: max(len(f), *(len(_fmt(r[f])) for r in rows)) for f in fieldnames}
    print("  ".join(f.ljust(widths[f]) for f in fieldnames))
    for r in rows:
        print("  ".join(_fmt(r[f]).ljust(widths[f]) for f in fieldnames))
    return EXIT_OK


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def cmd_bound_report(args) -> int:
    try:
        with open(args.stats, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    per_step: dict = {}
    for row in rows:
        step = int(row["step"])
        per_step[step] = (int(row["delta_total"]), int(row["theorem4_bound"]))
    lines = ["step,delta_atoms,bound,bound_violated"]
    violated_any = False
    for step in sorted(per_step):
        delta, bound = per_step[step]
        violated = delta > bound
        violated_any = violated_any or violated
        lines.append(f"{step},{delta},{bound},{str(violated).lower()}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if not violated_any else EXIT_INPUT_ERROR


def cmd_serve(args) -> int:
    from . import simservice

    if args.stdio:
        simservice.serve_stdio()
    else:
        def announce(addr):
            print(f"listening on {addr[0]}:{addr[1]}", flush=True)

        simservice.serve_tcp(args.host, args.port, ready_callback=announce)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latreason")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a temporal logic program")
    p_run.add_argument("--graph", help="GraphML or TSV-triples knowledge graph")
    p_run.add_argument("--rules", help="rule file, one rule per line")
    p_run.add_argument("--facts", help="fact file, one fact per line")
    p_run.add_argument("--node-id-labels", action="store_true",
                       help="let every node double as a unary predicate naming itself")
    p_run.add_argument("--out-dir", default="out")
    _add_engine_flags(p_run)
    p_run.set_defaults(fn=cmd_run)

    p_kg = sub.add_parser("kg-eval", help="knowledge-graph completion metrics")
    p_kg.add_argument("--graph", required=True)
    p_kg.add_argument("--rules", required=True)
    p_kg.add_argument("--test", required=True, help="held-out triples (e1<TAB>rel<TAB>e2)")
    p_kg.add_argument("--steps", default="1", help="comma-separated inference budgets")
    p_kg.add_argument("--k", default="1,3,10", help="comma-separated hits@k cutoffs")
    p_kg.add_argument("--direction", choices=["tail", "head"], default="tail")
    p_kg.add_argument("--filtered", action="store_true",
                      help="drop candidates already true in the training graph")
    p_kg.add_argument("--out", help="write metrics CSV here")
    p_kg.set_defaults(fn=cmd_kg_eval)

    p_bound = sub.add_parser("bound-report",
                             help="per-step new atoms vs the growth bound")
    p_bound.add_argument("--stats", required=True, help="stats.csv from a run")
    p_bound.add_argument("--out", help="write the report CSV here")
    p_bound.set_defaults(fn=cmd_bound_report)

    p_serve = sub.add_parser("serve", help="simulation service (NDJSON)")
    p_serve.add_argument("--stdio", action="store_true", help="serve one session on stdio")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
