"""Command-line front end for discovery, queries, simulation, and search.

One binary with subcommands, all delegating to :mod:`causalpattern.ops`:

* ``discover``        — estimate a pattern from a CSV dataset or an exact
  conditional-independence oracle built from a graph file
* ``query dsep``      — answer one separation query against a graph or pattern
* ``query claim``     — classify a cause/non-cause claim between two vertices
* ``simulate``        — draw a random linear-Gaussian model and sample it
* ``benchmark``       — Monte Carlo error-rate study of the discovery loop
* ``counterexample``  — exhaustive search for a sound-looking but false claim

Every subcommand is deterministic given its flags, supports ``--format kv``
(machine-readable ``key=value`` lines), and never writes to stderr on success.

Exit statuses are disjoint:

* 0 — success (any verdict counts as success for queries)
* 2 — configuration or parse failure (bad flags, malformed input file)
* 3 — oracle or statistical failure (singular data, too few samples,
  contradictory orientation constraints)
* 4 — a named vertex is unknown or not observed
* 5 — a counterexample search exhausted its bounds without a hit

``--jobs`` defaults to the available parallelism; the environment variable
``CAUSALPATTERN_JOBS`` overrides that default (an explicit flag still wins).
"""

from __future__ import annotations

import argparse
import sys
from typing import Iterable, Sequence, Union

from . import ops
from .errors import (
    CausalError,
    InsufficientSamples,
    NotFoundWithinBounds,
    NotObserved,
    OracleFailure,
    OrientationCycle,
    ParseError,
    SingularConditioning,
    UnknownVertex,
)
from .graphs import render_pattern
from .latent import render_report
from .sem import BenchmarkConfig

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_UNKNOWN_VERTEX = 4
EXIT_NOT_FOUND = 5


# --------------------------------------------------------------------------
# small I/O helpers


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _emit(text: str, out: Union[str, None]) -> None:
    """Send a finished document to ``--out`` or stdout."""
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text(out, text)


def _kv_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _emit_kv(pairs: Iterable[tuple[str, object]], out: Union[str, None]) -> None:
    text = "".join(f"{key}={_kv_value(value)}\n" for key, value in pairs)
    _emit(text, out)


def _split_given(chunks: Union[Sequence[str], None]) -> tuple[str, ...]:
    """Flatten repeated/comma-separated ``--given`` values into one tuple."""
    if not chunks:
        return ()
    return tuple(v for chunk in chunks for v in chunk.split(",") if v)


def _edge_lines(pattern_text: str) -> list[str]:
    return [ln for ln in pattern_text.splitlines() if not ln.startswith("node ")]


# --------------------------------------------------------------------------
# subcommand handlers


def _cmd_discover(args: argparse.Namespace) -> int:
    graph_text = _read_text(args.graph) if args.graph else None
    data_text = _read_text(args.data) if args.data else None
    result = ops.run_discover(
        graph_text=graph_text,
        data_text=data_text,
        source=args.graph or args.data,
        alpha=args.alpha,
        collider_rule=args.collider_rule,
    )
    pattern_text = render_pattern(result.pattern)
    if args.trace:
        _write_text(args.trace, result.trace.render())
    if args.format == "text":
        _emit(pattern_text, args.out)
    else:
        pairs: list[tuple[str, object]] = [
            ("oracle", result.oracle_kind),
            ("queries", result.query_count),
            ("singular", result.singular_queries),
            ("vertices", len(result.pattern.vertices)),
        ]
        edges = _edge_lines(pattern_text)
        pairs.append(("edges", len(edges)))
        pairs += [(f"edge.{i}", line) for i, line in enumerate(edges, start=1)]
        _emit_kv(pairs, args.out)
    return EXIT_OK


def _cmd_query_dsep(args: argparse.Namespace) -> int:
    path = args.graph or args.pattern
    result = ops.run_dsep(
        graph_text=_read_text(path),
        source=path,
        x=args.x,
        y=args.y,
        given=_split_given(args.given),
        method=args.method,
    )
    if args.format == "text":
        _emit(result.verdict + "\n", args.out)
    else:
        _emit_kv(
            [
                ("separated", result.separated),
                ("verdict", result.verdict),
                ("graph", result.graph_kind),
            ],
            args.out,
        )
    return EXIT_OK


def _cmd_query_claim(args: argparse.Namespace) -> int:
    path = args.pattern or args.graph
    result = ops.run_claim(
        graph_text=_read_text(path),
        source=path,
        x=args.source,
        z=args.target,
        rule=args.rule,
        premise=args.premise,
    )
    verdict = result.verdict
    if args.format == "text":
        _emit(verdict.render() + "\n", args.out)
    else:
        pairs: list[tuple[str, object]] = [
            ("kind", verdict.kind),
            ("witness", verdict.witness),
            ("rule", result.rule_applied),
        ]
        if verdict.path is not None:
            pairs.append(("path", " ".join(verdict.path)))
        if verdict.anchor is not None:
            pairs.append(("anchor", verdict.anchor))
        _emit_kv(pairs, args.out)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    result = ops.run_simulate(
        n_vars=args.vars,
        avg_degree=args.degree,
        n_samples=args.samples,
        seed=args.seed,
        coeff_low=args.coeff_low,
        coeff_high=args.coeff_high,
        noise_sd=args.noise_sd,
    )
    if args.graph_out:
        _write_text(args.graph_out, result.graph_text())
    if args.format == "text":
        _emit(result.csv_text(), args.out)
    else:
        if args.out is not None:
            _write_text(args.out, result.csv_text())
        pairs: list[tuple[str, object]] = [
            ("vars", args.vars),
            ("samples", result.dataset.n),
            ("seed", args.seed),
            ("columns", ",".join(result.dataset.columns)),
        ]
        if args.out is not None:
            pairs.append(("out", args.out))
        _emit_kv(pairs, None)
    return EXIT_OK


def _cmd_benchmark(args: argparse.Namespace) -> int:
    config = BenchmarkConfig(
        n_vars=args.vars,
        avg_degree=args.degree,
        n_samples=args.samples,
        alpha=args.alpha,
        n_trials=args.trials,
        coeff_low=args.coeff_low,
        coeff_high=args.coeff_high,
        noise_sd=args.noise_sd,
        seed=args.seed,
        collider_rule=args.collider_rule,
        oracle=args.oracle,
        jobs=args.jobs if args.jobs is not None else ops.default_jobs(),
    )
    report = ops.run_benchmark(config)
    text = report.render_text() if args.format == "text" else report.render_kv()
    _emit(text, args.out)
    return EXIT_OK


def _cmd_counterexample(args: argparse.Namespace) -> int:
    jobs = args.jobs if args.jobs is not None else ops.default_jobs()
    report = ops.run_counterexample(
        max_vertices=args.max_vertices,
        max_latents=args.max_latents,
        jobs=jobs,
    )
    report_text = render_report(report)
    if args.format == "text":
        _emit(report_text, args.out)
    else:
        if args.out is not None:
            _write_text(args.out, report_text)
        pairs: list[tuple[str, object]] = [
            ("found", True),
            ("source", report.x),
            ("target", report.z),
            ("instances_checked", report.instances_checked),
        ]
        if args.out is not None:
            pairs.append(("out", args.out))
        _emit_kv(pairs, None)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out", metavar="PATH", help="write the result here instead of stdout"
    )
    parser.add_argument(
        "--format",
        choices=("text", "kv"),
        default="text",
        help="text (default) or machine-readable key=value lines",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalpattern",
        description="Constraint-based causal structure discovery and analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    # discover ------------------------------------------------------------
    p = sub.add_parser(
        "discover",
        help="estimate a pattern from data or from an exact graph oracle",
    )
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", metavar="PATH", help="graph file with observe clause")
    source.add_argument("--data", metavar="PATH", help="CSV dataset")
    p.add_argument("--alpha", type=float, default=0.01, help="test level for --data")
    p.add_argument(
        "--collider-rule",
        choices=("literal", "sepset"),
        default="literal",
        help="unshielded-collider orientation test",
    )
    p.add_argument("--trace", metavar="PATH", help="also write the decision log here")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_discover)

    # query ---------------------------------------------------------------
    q = sub.add_parser("query", help="answer one separation or claim query")
    qsub = q.add_subparsers(dest="query_command", required=True, metavar="KIND")

    p = qsub.add_parser("dsep", help="is x separated from y given a set?")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", metavar="PATH", help="directed graph file")
    source.add_argument("--pattern", metavar="PATH", help="pattern file")
    p.add_argument("--x", required=True, help="first endpoint")
    p.add_argument("--y", required=True, help="second endpoint")
    p.add_argument(
        "--given",
        action="append",
        metavar="V[,V...]",
        help="conditioning vertex (repeat or comma-separate for a set)",
    )
    p.add_argument(
        "--method",
        choices=("reach", "enum"),
        default="reach",
        help="separation engine to use",
    )
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_query_dsep)

    p = qsub.add_parser("claim", help="classify a cause/non-cause claim")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--pattern", metavar="PATH", help="pattern file")
    source.add_argument("--graph", metavar="PATH", help="directed graph file")
    p.add_argument("--from", dest="source", required=True, help="candidate cause")
    p.add_argument("--to", dest="target", required=True, help="candidate effect")
    p.add_argument(
        "--rule",
        choices=ops.CLAIM_RULES,
        default="auto",
        help="which decision rule to apply (auto tries all)",
    )
    p.add_argument(
        "--premise",
        choices=("arrow", "strict"),
        default="arrow",
        help="reading of the edge premise for the thm3 rule",
    )
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_query_claim)

    # simulate --------------------------------------------------------------
    p = sub.add_parser("simulate", help="sample a random linear-Gaussian model")
    p.add_argument("--vars", type=int, default=10, help="number of variables")
    p.add_argument("--degree", type=float, default=2.0, help="average vertex degree")
    p.add_argument("--samples", type=int, default=1000, help="number of rows")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument("--coeff-low", type=float, default=0.5, help="|coefficient| lower bound")
    p.add_argument("--coeff-high", type=float, default=1.5, help="|coefficient| upper bound")
    p.add_argument("--noise-sd", type=float, default=1.0, help="noise standard deviation")
    p.add_argument("--graph-out", metavar="PATH", help="also write the generating graph")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_simulate)

    # benchmark -------------------------------------------------------------
    p = sub.add_parser("benchmark", help="Monte Carlo error-rate study")
    p.add_argument("--vars", type=int, default=10, help="number of variables")
    p.add_argument("--degree", type=float, default=2.0, help="average vertex degree")
    p.add_argument("--samples", type=int, default=5000, help="rows per trial")
    p.add_argument("--alpha", type=float, default=0.01, help="test level")
    p.add_argument("--trials", type=int, default=100, help="number of trials")
    p.add_argument("--coeff-low", type=float, default=0.3, help="|coefficient| lower bound")
    p.add_argument("--coeff-high", type=float, default=1.0, help="|coefficient| upper bound")
    p.add_argument("--noise-sd", type=float, default=1.0, help="noise standard deviation")
    p.add_argument("--seed", type=int, default=0, help="RNG seed")
    p.add_argument(
        "--collider-rule",
        choices=("literal", "sepset"),
        default="sepset",
        help="unshielded-collider orientation test",
    )
    p.add_argument(
        "--oracle",
        choices=("data", "exact"),
        default="data",
        help="test independence on sampled data or on the true graph",
    )
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_benchmark)

    # counterexample ----------------------------------------------------------
    p = sub.add_parser(
        "counterexample",
        help="search for a pattern whose cause claim the true graph refutes",
    )
    p.add_argument("--max-vertices", type=int, default=6, help="largest vertex count")
    p.add_argument("--max-latents", type=int, default=1, help="largest latent count")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")
    _add_output_flags(p)
    p.set_defaults(handler=_cmd_counterexample)

    return parser


# --------------------------------------------------------------------------
# entry point


def main(argv: Union[Sequence[str], None] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ParseError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except (UnknownVertex, NotObserved) as exc:
        print(exc, file=sys.stderr)
        return EXIT_UNKNOWN_VERTEX
    except NotFoundWithinBounds as exc:
        print(exc, file=sys.stderr)
        return EXIT_NOT_FOUND
    except (OracleFailure, SingularConditioning, InsufficientSamples, OrientationCycle) as exc:
        print(exc, file=sys.stderr)
        return EXIT_ORACLE
    except OSError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except CausalError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
