from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Optional, Sequence

from ..core.config import settings
from ..core.errors import WngfError
from ..domain import brokerage, dichotomize as dich, stats
from ..domain.graph import GroupPartition, PartitionedGraph, WeightedDigraph, attach_partition, build_graph
from ..domain.models import BrokerageMode, BrokerageProfile, DichotomizationSpec, RetentionReport
from ..storage import csv_files
from ..storage.csv_files import EdgeListFormat, MatrixInput

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphSource:
    """Exactly one of an edge list or one or more adjacency matrices."""

    edges: Optional[Path] = None
    matrices: tuple[Path, ...] = ()
    aggregate: bool = False
    drop_self_loops: bool = False
    fmt: EdgeListFormat = field(default_factory=EdgeListFormat)

    @property
    def label(self) -> str:
        return str(self.edges) if self.edges is not None else ",".join(str(p) for p in self.matrices)

    def load(self, extra_nodes: Iterable[str] = ()) -> WeightedDigraph:
        if self.edges is not None:
            records = csv_files.read_edge_list(self.edges, self.fmt)
        else:
            records = csv_files.read_adjacency_matrices(
                MatrixInput(paths=list(self.matrices), aggregate=self.aggregate, drop_self_loops=self.drop_self_loops)
            )
        try:
            return build_graph(records, drop_self_loops=self.drop_self_loops, extra_nodes=extra_nodes)
        except WngfError as e:
            raise e.with_source(self.label)


@dataclass(frozen=True)
class ComputeResult:
    profile: BrokerageProfile
    mode: BrokerageMode
    group_count: int
    edge_count: int
    retention: Optional[RetentionReport] = None
    oracle: Literal["passed", "skipped", "off"] = "off"


def _partitioned(g: WeightedDigraph, partition: GroupPartition, groups: Path) -> PartitionedGraph:
    try:
        return attach_partition(g, partition)
    except WngfError as e:
        raise e.with_source(str(groups))


def compute(
    source: GraphSource,
    groups: Path,
    mode: BrokerageMode,
    out: Path,
    dichotomization: Optional[DichotomizationSpec] = None,
    include_isolates: bool = False,
    oracle_check: bool = False,
    workers: Optional[int] = None,
) -> ComputeResult:
    partition = csv_files.read_partition(groups)
    g = source.load(extra_nodes=partition.assignment if include_isolates else ())

    retention = None
    if dichotomization is not None:
        reduced = dich.dichotomize(g, dichotomization)
        retention = dich.retention_report(g, reduced)
        logger.info("Dichotomized (%s): %s", dichotomization.describe(), retention.summary())
        g = reduced

    pg = _partitioned(g, partition, groups)
    counts = brokerage.count_roles(pg, mode, workers=workers)

    oracle: Literal["passed", "skipped", "off"] = "off"
    if oracle_check:
        if pg.graph.n <= settings.oracle_max_nodes:
            brokerage.check_against_oracle(pg, mode, counts)
            oracle = "passed"
        else:
            logger.warning(
                "Oracle check skipped: %d nodes exceeds bound %d", pg.graph.n, settings.oracle_max_nodes
            )
            oracle = "skipped"

    profile = brokerage.normalize(counts, pg)
    csv_files.write_profile(profile, out)
    return ComputeResult(
        profile=profile,
        mode=BrokerageMode(mode),
        group_count=len(pg.group_labels),
        edge_count=pg.graph.edge_count,
        retention=retention,
        oracle=oracle,
    )


def reduce(
    source: GraphSource,
    spec: DichotomizationSpec,
    out: Path,
    matrix_out: Optional[Path] = None,
    groups: Optional[Path] = None,
    groups_out: Optional[Path] = None,
) -> RetentionReport:
    """Write the reduced edge list; optionally its matrix and the partition of the nodes it keeps."""
    g = source.load()
    partition = csv_files.read_partition(groups) if groups is not None else None
    if partition is not None:
        _partitioned(g, partition, groups)  # type: ignore[arg-type]

    reduced = dich.dichotomize(g, spec)
    report = dich.retention_report(g, reduced)
    csv_files.write_edge_list(reduced, out)
    if matrix_out is not None:
        csv_files.write_adjacency_matrix(reduced, matrix_out)
    if partition is not None and groups_out is not None:
        lost = set(report.isolated)
        kept = {node: group for node, group in partition.assignment.items() if node not in lost}
        csv_files.write_partition(GroupPartition(kept), groups_out)
    if not report.all_nodes_retained:
        logger.warning("%s isolated %d node(s): %s", spec.describe(), len(report.isolated), ", ".join(report.isolated))
    return report


def compare(
    a: Path,
    b: Path,
    out: Path,
    k: Optional[int] = None,
    label_a: Optional[str] = None,
    label_b: Optional[str] = None,
) -> stats.ComparisonReport:
    pa = csv_files.read_profile(a)
    pb = csv_files.read_profile(b)
    try:
        report = stats.compare_profiles(pa, pb, k=k, label_a=label_a or a.stem, label_b=label_b or b.stem)
    except WngfError as e:
        raise e.with_source(f"{a},{b}")
    csv_files.write_report(report, out)
    return report


def _method_labels(paths: Sequence[Path]) -> list[str]:
    stems = [p.stem for p in paths]
    if len(set(stems)) == len(stems):
        return stems
    return [str(p) for p in paths]


def ecdfs(profiles: Sequence[Path], out: Path) -> int:
    rows: list[tuple] = []
    for path, method in zip(profiles, _method_labels(profiles)):
        profile = csv_files.read_profile(path)
        rows.extend((role, method, curve) for role, curve in stats.role_ecdfs(profile).items())
    csv_files.write_ecdf(rows, out)
    return sum(len(curve.values) for _, _, curve in rows)


def sweep(
    source: GraphSource,
    method: Literal["threshold", "backbone"],
    out: Path,
    levels: Optional[Sequence[float]] = None,
) -> tuple[list[tuple[float, RetentionReport]], Optional[float]]:
    g = source.load()
    results = dich.retention_sweep(g, method, levels)
    csv_files.write_retention_sweep(method, results, out)
    return results, dich.best_retaining_level(method, results)
