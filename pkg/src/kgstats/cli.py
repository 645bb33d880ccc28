"""``kgstats`` command-line front end."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings

from . import graphfile, ntriples, store
from .codec import FormatError
from .engine import AlgorithmConfig, MemoryBudgetExceeded, compute_statistics, parse_mask
from .estimate import Estimator, PatternError, parse_schema_triple
from .hierarchy import CycleError, HierarchyIndex
from .schema import extract_stored_schema
from .terms import ConflictingKind, compact, short

log = logging.getLogger("kgstats")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SYNTAX = 3
EXIT_CYCLE = 4
EXIT_FORMAT = 5
EXIT_MEMORY = 6


def _load_graph(path: str, collapse: bool | None = None):
    """Graph and hierarchy from a graph.bin or directly from N-Triples."""
    if path.endswith(".nt"):
        g = ntriples.load([path])
        header = {}
    else:
        g, header = graphfile.load_graph(path)
    if collapse is None:
        collapse = header.get("collapse_cycles", False)
    return g, HierarchyIndex(g, collapse_cycles=collapse), header


def cmd_ingest(args) -> int:
    start = time.perf_counter()
    errors: list = []
    g = ntriples.load(args.files, strict=not args.lenient, errors=errors)
    h = HierarchyIndex(g, collapse_cycles=args.collapse_cycles)
    header = {"inputs": [str(f) for f in args.files], "collapse_cycles": args.collapse_cycles}
    graphfile.save_graph(g, args.out, header)
    report = {
        "triples": len(g),
        "terms": len(g.terms),
        "classes": len(h.classes),
        "predicates": len(h.predicates),
        "skipped_lines": len(errors),
        "seconds": round(time.perf_counter() - start, 3),
        "out": str(args.out),
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_stats(args) -> int:
    phases = {}
    t0 = time.perf_counter()
    g, h, _ = _load_graph(args.graph, True if args.collapse_cycles else None)
    phases["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    ssg = extract_stored_schema(g, h)
    cfg = AlgorithmConfig.from_modes(
        args.modes.split(","), algorithm=args.alg, u=args.u, l=args.l,
        include_meta=args.meta, sketch=args.sketch,
    )
    phases["schema"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    index = compute_statistics(g, h, ssg, cfg, workers=args.workers)
    phases["count"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    store.save(index, args.out)
    phases["save"] = time.perf_counter() - t0

    manifest = {
        "input": str(args.graph),
        "algorithm": cfg.algorithm.value,
        "u": args.u if cfg.algorithm.value == "levels" else None,
        "l": args.l if cfg.algorithm.value == "levels" else None,
        "modes": sorted(cfg.modes),
        "include_meta": cfg.include_meta,
        "sketch": cfg.sketch,
        "workers": args.workers,
        "output": str(args.out),
        "triples": len(g),
        "stored_schema_triples": len(ssg.schema_triples),
        "bound_schema_triples": len(index.bound),
        "bound": index.n_bound_keys,
        "unbound": index.n_unbound_keys,
        "signatures": index.run.signatures,
        "timings": {k: round(v, 4) for k, v in phases.items()},
    }
    with open(str(args.out) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(manifest, indent=2, sort_keys=True))
    return EXIT_OK


def _warn_to_stderr(caught) -> None:
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)


def cmd_query(args) -> int:
    index = store.load(args.index)
    st = parse_schema_triple(args.type, index.terms)
    mask = parse_mask(args.positions)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = store.retrieve_statistics(index, st, mask, args.counter, args.mode)
    _warn_to_stderr(caught)
    how = {
        "exact": "exact",
        "above": "sum-over-keys-below",
        "below": "min-over-keys-above",
        "not-covered": "not-covered",
    }[result.how]
    sources = "; ".join(index.format_triple(t) for t in result.sources)
    print(f"{result.value}\t{how}" + (f"\t{sources}" if sources and result.how != "exact" else ""))
    return EXIT_OK


def cmd_estimate(args) -> int:
    index = store.load(args.index)
    graph = hier = None
    if args.graph:
        graph, hier, _ = _load_graph(args.graph)
    est = Estimator(index, graph, hier)
    patterns = [est.parse(p) for p in args.pattern]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if len(patterns) == 1:
            e = est.estimate(patterns[0], mode=args.mode)
            print(f"{e.value:g}\t{e.how}\ttype={index.format_triple(e.type)}")
        elif len(patterns) == 2:
            for tp, raw in zip(patterns, args.pattern):
                e = est.estimate(tp, mode=args.mode)
                print(f"{e.value:g}\t{e.how}\ttype={index.format_triple(e.type)}\t{raw}")
            j = est.estimate_join(*patterns)
            for c in j.candidates:
                print(f"{c.value:g}\tjoin-heuristic\t?{j.variable}:{short(c.join_type)}")
        else:
            raise PatternError("give one pattern, or two patterns sharing a variable")
    _warn_to_stderr(caught)
    return EXIT_OK


def cmd_dump_schema(args) -> int:
    g, h, _ = _load_graph(args.graph)
    ssg = extract_stored_schema(g, h)
    lex = g.terms.lexical
    for kind, triples in (("schema", ssg.schema_triples), ("meta", ssg.meta_triples)):
        for t in sorted(triples, key=lambda t: tuple(lex(x) for x in t)):
            print(f"{kind}\t" + "\t".join(compact(lex(x)) for x in t))
    for t in sorted(ssg.hierarchy_triples, key=lambda t: tuple(lex(x) for x in t)):
        print("hierarchy\t" + "\t".join(compact(lex(x)) for x in t))
    return EXIT_OK


def cmd_export(args) -> int:
    index = store.load(args.index)
    sys.stdout.write(index.to_tsv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kgstats", description="Schema-based statistics for knowledge graphs.")
    ap.add_argument("-v", "--verbose", action="store_true", help="progress logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse N-Triples into a graph file")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--lenient", action="store_true", help="skip malformed lines instead of failing")
    p.add_argument("--collapse-cycles", action="store_true", help="merge subclass cycles instead of failing")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="compute a statistical index")
    p.add_argument("graph", help="graph.bin from ingest, or an .nt file")
    p.add_argument("--alg", choices=("stored", "all", "levels"), default="stored")
    p.add_argument("-u", type=int, default=0, help="levels above the stored schema (levels only)")
    p.add_argument("-l", type=int, default=0, help="levels below the stored schema (levels only)")
    p.add_argument("--modes", default="all,distinct,bound,unbound")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--sketch", action="store_true", help="approximate distinct counts with HyperLogLog")
    p.add_argument("--meta", action="store_true",
                   help="also count rdf:type, rdfs:subClassOf, ... triples under (owl:Thing, p, owl:Thing)")
    p.add_argument("--collapse-cycles", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("query", help="look up or approximate one counter")
    p.add_argument("index")
    p.add_argument("--type", required=True, help='schema triple, e.g. "person wasBornIn location"')
    p.add_argument("--positions", default="spo")
    p.add_argument("--counter", choices=("all", "distinct"), default="all")
    p.add_argument("--mode", choices=("bound", "unbound"), default="bound")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("estimate", help="estimate triple-pattern cardinality")
    p.add_argument("index")
    p.add_argument("--pattern", action="append", required=True, help='e.g. "?x wasBornIn athens"')
    p.add_argument("--graph", help="graph file, to type bound individuals by their own classes")
    p.add_argument("--mode", choices=("bound", "unbound"), default="bound")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("dump-schema", help="print the stored schema graph")
    p.add_argument("graph")
    p.set_defaults(func=cmd_dump_schema)

    p = sub.add_parser("export", help="dump an index in a text format")
    p.add_argument("index")
    p.add_argument("--format", choices=("tsv",), default="tsv")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ntriples.NTriplesError as exc:
        print(f"error: line {exc.line_no}: {exc.reason}", file=sys.stderr)
        return EXIT_SYNTAX
    except CycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CYCLE
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except MemoryBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except (PatternError, ConflictingKind, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
