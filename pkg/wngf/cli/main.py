"""``wngf`` command line: compute, dichotomize, compare, ecdf and sweep."""
from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import NoReturn, Optional, Sequence

from pydantic import ValidationError

from ..core.config import settings
from ..core.errors import UsageError, WngfError
from ..core.log import configure_logging
from ..domain.models import ROLES, BrokerageMode, RetentionReport
from ..domain import stats
from ..services import pipeline
from ..services.pipeline import GraphSource
from ..storage.csv_files import EdgeListFormat
from .schemas import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

_ARGUMENT_PREFIX = re.compile(r"^argument (\S+?)(?:/\S+)?: ")


class _Parser(argparse.ArgumentParser):
    """Reports usage problems as UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        source = None
        m = _ARGUMENT_PREFIX.match(message)
        if m:
            source = m.group(1)
            message = message[m.end():]
        raise UsageError(message, source=source)


def _graph_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--edges", type=Path, help="Edge list CSV (source,target,weight)")
    p.add_argument("--matrix", dest="matrices", type=Path, action="append", default=[],
                   help="Square adjacency matrix CSV; repeat with --aggregate to sum several")
    p.add_argument("--aggregate", action="store_true", help="Sum repeated --matrix inputs")
    p.add_argument("--drop-self-loops", action="store_true", help="Discard q->q entries instead of failing")
    p.add_argument("--delimiter", default=",", help="Edge list field delimiter (default: ,)")
    p.add_argument("--no-header", action="store_true", help="Edge list has no header row")


def _method(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--method", choices=["threshold", "backbone"], required=required,
                   help="Dichotomization technique")
    p.add_argument("--fraction", type=float, help="Threshold: share of lightest edges removed, in [0, 1)")
    p.add_argument("--alpha", type=float, help="Backbone: significance level, in (0, 1]")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    p = _Parser(prog=settings.app_name, description="Gould-Fernandez brokerage on weighted directed graphs")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("compute", parents=[common], help="Brokerage profile of a partitioned graph")
    _graph_input(c)
    c.add_argument("--groups", type=Path, required=True, help="Partition CSV (node,group)")
    c.add_argument("--mode", choices=[m.value for m in BrokerageMode], default=BrokerageMode.WEIGHTED.value,
                   help="wngf (weighted rule) or binary (classical rule)")
    _method(c, required=False)
    c.add_argument("--include-isolates", action="store_true",
                   help="Keep partition nodes that have no edges")
    c.add_argument("--oracle-check", action="store_true",
                   help="Cross-check counts against the brute-force enumeration")
    c.add_argument("--workers", type=int, help="Threads used for counting")
    c.add_argument("--top", type=int, help="Print the N highest-scoring nodes per role")
    c.add_argument("--out", type=Path, required=True, help="Profile CSV to write")

    d = sub.add_parser("dichotomize", parents=[common], help="Reduce a weighted graph to a binary one")
    _graph_input(d)
    _method(d, required=True)
    d.add_argument("--out", type=Path, required=True, help="Reduced edge list CSV to write")
    d.add_argument("--matrix-out", type=Path, help="Also write the reduced graph as a square matrix CSV")
    d.add_argument("--groups", type=Path, help="Partition CSV of the input graph")
    d.add_argument("--groups-out", type=Path, help="Write the partition restricted to nodes that keep an edge")

    k = sub.add_parser("compare", parents=[common], help="Correlate and rank two profiles")
    k.add_argument("--a", type=Path, required=True, help="First profile CSV")
    k.add_argument("--b", type=Path, required=True, help="Second profile CSV")
    k.add_argument("--label-a", help="Name of the first method (default: file stem)")
    k.add_argument("--label-b", help="Name of the second method (default: file stem)")
    k.add_argument("--top-k", type=int, help="Divergent nodes listed per role (default: 5)")
    k.add_argument("--out", type=Path, required=True, help="Report CSV to write")

    e = sub.add_parser("ecdf", parents=[common], help="Per-role ECDFs of one or more profiles")
    e.add_argument("--profiles", type=Path, nargs="+", required=True, help="Profile CSVs")
    e.add_argument("--out", type=Path, required=True, help="ECDF CSV to write")

    s = sub.add_parser("sweep", parents=[common], help="Node retention across dichotomization levels")
    _graph_input(s)
    s.add_argument("--method", choices=["threshold", "backbone"], required=True)
    s.add_argument("--levels", type=float, nargs="+",
                   help="Fractions or alphas to try (default: 0.05-0.60 or 0.05-0.50)")
    s.add_argument("--out", type=Path, required=True, help="Sweep CSV to write")
    return p


def _run_config(args: argparse.Namespace) -> RunConfig:
    values = {key: value for key, value in vars(args).items() if value is not None}
    return RunConfig(**values)


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


# whole-model failures are attributed to the flag that selects the model
_MODEL_FLAGS = {"DichotomizationSpec": "--method", "EdgeListFormat": "--delimiter"}


def _usage_from_validation(e: ValidationError) -> UsageError:
    err = e.errors()[0]
    message = str(err.get("msg", "invalid arguments")).removeprefix("Value error, ")
    loc = err.get("loc") or ()
    if loc:
        return UsageError(message, source=_flag(str(loc[0])))
    flag, sep, rest = message.partition(": ")
    if sep and flag.startswith("--"):
        return UsageError(rest, source=flag)
    return UsageError(message, source=_MODEL_FLAGS.get(e.title))


def _source(cfg: RunConfig) -> GraphSource:
    return GraphSource(
        edges=cfg.edges,
        matrices=tuple(cfg.matrices),
        aggregate=cfg.aggregate,
        drop_self_loops=cfg.drop_self_loops,
        fmt=EdgeListFormat(delimiter=cfg.delimiter, has_header=not cfg.no_header),
    )


def _print_retention(report: RetentionReport) -> None:
    print(f"Retention: {report.summary()}")
    if not report.all_nodes_retained:
        print(f"WARNING: {len(report.isolated)} node(s) lost all edges: {', '.join(report.isolated)}")


def _fmt(value: Optional[float]) -> str:
    return "NA" if value is None else f"{value:.4f}"


def _starred(result: stats.CorrelationResult) -> str:
    return _fmt(result.coefficient) + result.stars


def _cmd_compute(cfg: RunConfig) -> None:
    result = pipeline.compute(
        _source(cfg),
        cfg.groups,  # type: ignore[arg-type]
        cfg.mode,
        cfg.out,  # type: ignore[arg-type]
        dichotomization=cfg.dichotomization(),
        include_isolates=cfg.include_isolates,
        oracle_check=cfg.oracle_check,
        workers=cfg.workers,
    )
    if result.retention is not None:
        _print_retention(result.retention)
    profile = result.profile
    print(
        f"Profile ({result.mode.value}): {len(profile.nodes)} nodes, {result.group_count} groups, "
        f"{result.edge_count} edges -> {cfg.out}"
    )
    totals = profile.counts.sum(axis=0)
    for role in ROLES:
        print(f"  {role.value:<15} {int(totals[role.code])}")
    if cfg.top is not None:
        for role in ROLES:
            ranked = ", ".join(f"{node} ({score:.4f})" for node, score in stats.top_nodes(profile, role, cfg.top))
            print(f"  top {cfg.top} {role.value}: {ranked}")
    if result.oracle != "off":
        print(f"Oracle check: {result.oracle}")


def _cmd_dichotomize(cfg: RunConfig) -> None:
    spec = cfg.dichotomization()
    report = pipeline.reduce(
        _source(cfg), spec, cfg.out,  # type: ignore[arg-type]
        matrix_out=cfg.matrix_out, groups=cfg.groups, groups_out=cfg.groups_out,
    )
    print(f"Dichotomized ({spec.describe()}) -> {cfg.out}")  # type: ignore[union-attr]
    _print_retention(report)


def _cmd_compare(cfg: RunConfig) -> None:
    report = pipeline.compare(cfg.a, cfg.b, cfg.out, k=cfg.top_k,  # type: ignore[arg-type]
                              label_a=cfg.label_a, label_b=cfg.label_b)
    print(f"{report.label_a} vs {report.label_b} -> {cfg.out}")
    print(f"  {'role':<15} {'pearson':>11} {'p':>8} {'spearman':>11} {'p':>8}")
    for rc in report.roles:
        print(
            f"  {rc.role.value:<15} {_starred(rc.pearson):>11} {_fmt(rc.pearson.p_value):>8} "
            f"{_starred(rc.spearman):>11} {_fmt(rc.spearman.p_value):>8}"
        )
    print("  * p <= .05, ** p <= .01, *** p <= .001")
    for rc in report.roles:
        ranked = ", ".join(f"{d.rank}. {d.node} ({d.abs_diff:.4f})" for d in rc.top)
        print(f"  top {report.k} {rc.role.value}: {ranked}")


def _cmd_ecdf(cfg: RunConfig) -> None:
    points = pipeline.ecdfs(cfg.profiles, cfg.out)  # type: ignore[arg-type]
    print(f"ECDF: {points} points from {len(cfg.profiles)} profile(s) -> {cfg.out}")


def _cmd_sweep(cfg: RunConfig) -> None:
    results, best = pipeline.sweep(_source(cfg), cfg.method, cfg.out, cfg.levels)  # type: ignore[arg-type]
    for level, report in results:
        print(f"  {cfg.method} {level:g}: {report.summary()}")
    if best is None:
        print("No level keeps every node")
    else:
        print(f"Best level keeping every node: {best:g}")


_COMMANDS = {
    "compute": _cmd_compute,
    "dichotomize": _cmd_dichotomize,
    "compare": _cmd_compare,
    "ecdf": _cmd_ecdf,
    "sweep": _cmd_sweep,
}


def _report(e: Exception) -> None:
    print(f"{settings.app_name}: error: {e}", file=sys.stderr)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _run_config(args)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        _report(e)
        return EXIT_USAGE
    except ValidationError as e:
        _report(_usage_from_validation(e))
        return EXIT_USAGE

    configure_logging("DEBUG" if cfg.verbose else None)
    logger.debug("Run configuration: %s", cfg.model_dump(exclude_defaults=True))
    try:
        _COMMANDS[cfg.command](cfg)
    except ValidationError as e:
        _report(_usage_from_validation(e))
        return EXIT_USAGE
    except WngfError as e:
        _report(e)
        return EXIT_DATA
    except OSError as e:
        _report(e)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run())
