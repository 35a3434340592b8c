"""Command-line interface.

Commands: normalize, trace, gen, convert, audit, bench.  Results go to
stdout and are byte-deterministic for equal inputs; notices and timings go
to stderr.  Exit codes: 0 success, 1 parse error, 2 fuel exhausted,
3 audit or shape violation, 10 not convertible.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import analysis, corpus, env_machine, nbe, sharing, subst_machine
from .errors import AuditViolation, FuelError, ShapeViolation, UnfoldCapExceeded
from .syntax import ParseError, parse, pretty

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_FUEL = 2
EXIT_AUDIT = 3
EXIT_NOT_CONVERTIBLE = 10

DEFAULT_CAP = 10**5
AUDIT_KINDS = ("shape", "decode", "potential", "bisim")

RECURSION_LIMIT = 30000


def _default_fuel() -> int:
    env = os.environ.get("STRONGCBV_FUEL")
    if env:
        try:
            value = int(env)
            if value > 0:
                return value
        except ValueError:
            pass
        print(f"ignoring invalid STRONGCBV_FUEL={env!r}", file=sys.stderr)
    return subst_machine.DEFAULT_FUEL


def _read_term(path: str):
    if path == "-":
        return parse(sys.stdin.read())
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


def _parse_audits(values: list[str] | None) -> set[str]:
    if not values:
        return {"shape"}
    out: set[str] = set()
    for value in values:
        for name in value.split(","):
            name = name.strip()
            if not name:
                continue
            if name == "all":
                out.update(AUDIT_KINDS)
            elif name == "none":
                pass
            elif name in AUDIT_KINDS:
                out.add(name)
            else:
                raise argparse.ArgumentTypeError(f"unknown audit {name!r}")
    return out


def _machine_stats(result: subst_machine.RunResult) -> list[str]:
    lines = [f"steps: {result.steps}", f"beta: {result.beta_count}"]
    per_rule = " ".join(f"{r}:{result.rule_counts[r]}" for r in sorted(result.rule_counts))
    lines.append(f"rules: {per_rule}")
    lines.append(f"heap: {result.heap_size}")
    return lines


def _graph_stats(graph: sharing.TermGraph) -> list[str]:
    return [
        f"node_count: {graph.node_count()}",
        f"unfolded_size: {graph.unfolded_size()}",
    ]


def _print_graph(graph: sharing.TermGraph, out: str, cap: int) -> None:
    if out == "dag":
        sys.stdout.write(sharing.dag_text(graph))
        return
    if graph.unfolded_size() > cap:
        print(f"normal form unfolds to {graph.unfolded_size()} nodes, above cap {cap}; showing shared form", file=sys.stderr)
        sys.stdout.write(sharing.dag_text(graph))
        return
    print(pretty(graph.unfold(cap)))


def cmd_normalize(args) -> int:
    t = _read_term(args.path)
    audits = _parse_audits(args.audit)
    if args.machine == "nbe":
        for kind in sorted(audits & {"shape", "decode", "potential"}):
            print(f"audit {kind}: inapplicable to the nbe evaluator", file=sys.stderr)
        try:
            graph = nbe.nbe_normalize(t)
        except RecursionError:
            print("evaluation did not terminate within the recursion budget", file=sys.stderr)
            return EXIT_FUEL
        if args.out != "stats":
            _print_graph(graph, args.out, args.cap)
        if args.out == "stats" or args.stats:
            for line in _graph_stats(graph):
                print(line)
        return EXIT_OK

    if "bisim" in audits and not analysis.bisim_check(t, fuel=args.fuel):
        print("bisimulation audit failed: machines disagree", file=sys.stderr)
        return EXIT_AUDIT

    if "decode" in audits or "potential" in audits:
        analysis.audit_trace(t, fuel=args.fuel)

    machine = env_machine if args.machine == "env" else subst_machine
    hook = None
    if "shape" in audits:
        caches = analysis._Caches()
        # shape is defined on substitution-machine states; environment
        # states are checked through their translation
        translator = env_machine.Translator() if machine is env_machine else None

        def hook(i, rule, mode, cfg):
            view = translator.config(cfg, snapshot_heap=False) if translator else cfg
            analysis._check_shape(view, caches)

    result = machine.run(t, fuel=args.fuel, hook=hook)
    if args.out == "csv":
        _write_csv(analysis.emit_trace_csv(t, fuel=args.fuel))
        return EXIT_OK
    if args.out != "stats":
        _print_graph(result.graph, args.out, args.cap)
    if args.out == "stats" or args.stats:
        for line in _machine_stats(result) + _graph_stats(result.graph):
            print(line)
    return EXIT_OK


def _write_csv(rows) -> None:
    print(analysis.CSV_HEADER)
    for row in rows:
        print(",".join(str(x) for x in row))


def cmd_trace(args) -> int:
    t = _read_term(args.path)
    rows = analysis.emit_trace_csv(t, fuel=args.fuel)
    _write_csv(rows)
    return EXIT_OK


def cmd_gen(args) -> int:
    from .syntax import gen_family

    print(pretty(gen_family(args.family, args.n)))
    return EXIT_OK


def cmd_convert(args) -> int:
    t1 = _read_term(args.path_a)
    t2 = _read_term(args.path_b)
    if sharing.convertible(t1, t2, fuel=args.fuel):
        print("convertible")
        return EXIT_OK
    print("not convertible")
    return EXIT_NOT_CONVERTIBLE


def cmd_audit(args) -> int:
    t = _read_term(args.path)
    report = analysis.audit_trace(t, fuel=args.fuel)
    print(f"steps: {report.steps}")
    print(f"beta: {report.beta_count}")
    print(f"phi_initial: {report.phi_initial}")
    print(f"trace_bound: {report.trace_bound}")
    print(f"trace_margin: {report.trace_margin}")
    checks = " ".join(f"{k}:{v}" for k, v in sorted(report.decode_checks.items()))
    print(f"decode_checks: {checks}" if report.decode_checked else "decode_checks: skipped (open term)")
    print("violations: 0")
    return EXIT_OK


def cmd_bench(args) -> int:
    entries = corpus.standard_corpus()
    if args.random:
        entries = entries + [
            (f"random_{i}", t) for i, t in enumerate(corpus.random_corpus(args.random))
        ]

    def one(item):
        name, term = item
        started = time.perf_counter()
        try:
            result = subst_machine.run(term, fuel=args.fuel)
        except FuelError:
            return name, None, time.perf_counter() - started
        return (
            name,
            (result.steps, result.beta_count, result.graph.node_count()),
            time.perf_counter() - started,
        )

    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(_bench_one, [(n, t, args.fuel) for n, t in entries]))
    else:
        outcomes = [one(item) for item in entries]

    for name, stats, elapsed in outcomes:
        if stats is None:
            print(f"{name}\tfuel-exhausted")
        else:
            steps, beta, nodes = stats
            print(f"{name}\tsteps={steps}\tbeta={beta}\tnodes={nodes}")
        print(f"{name}\t{elapsed * 1000:.1f} ms", file=sys.stderr)
    return EXIT_OK


def _bench_one(packed):
    name, term, fuel = packed
    started = time.perf_counter()
    try:
        result = subst_machine.run(term, fuel=fuel)
    except FuelError:
        return name, None, time.perf_counter() - started
    return (
        name,
        (result.steps, result.beta_count, result.graph.node_count()),
        time.perf_counter() - started,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strongcbv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    fuel = _default_fuel()

    def common(p, path=True):
        if path:
            p.add_argument("path", nargs="?", default="-", help="input file, or - for stdin")
        p.add_argument("--fuel", type=int, default=fuel, help="transition budget")

    p = sub.add_parser("normalize", help="normalize a term")
    common(p)
    p.add_argument("--machine", choices=("subst", "env", "nbe"), default="subst")
    p.add_argument("--audit", action="append", metavar="KIND", help="shape, decode, potential, bisim, all, none")
    p.add_argument("--out", choices=("term", "dag", "stats", "csv"), default="term")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max unfolded size to print")
    p.add_argument("--stats", action="store_true", help="append the stats block")
    p.set_defaults(fn=cmd_normalize)

    p = sub.add_parser("trace", help="emit the per-step potential trace as CSV")
    common(p)
    p.set_defaults(fn=cmd_trace)

    p = sub.add_parser("gen", help="print a member of a term family")
    p.add_argument("family")
    p.add_argument("n", type=int, nargs="?", default=0)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("convert", help="check two terms for convertibility")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--fuel", type=int, default=fuel)
    p.set_defaults(fn=cmd_convert)

    p = sub.add_parser("audit", help="run the full per-step audit")
    common(p)
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("bench", help="run the benchmark corpus")
    p.add_argument("--fuel", type=int, default=fuel)
    p.add_argument("--random", type=int, default=0, help="add N random closed terms")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    if sys.getrecursionlimit() < RECURSION_LIMIT:
        sys.setrecursionlimit(RECURSION_LIMIT)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FuelError as exc:
        print(f"fuel exhausted: {exc}", file=sys.stderr)
        return EXIT_FUEL
    except (AuditViolation, ShapeViolation) as exc:
        print(f"audit violation: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except UnfoldCapExceeded as exc:
        print(f"refusing to unfold: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
