from __future__ import annotations

import logging
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.errors import InputFormatError, OutputError
from ..domain.brokerage import profile_from_counts
from ..domain.graph import EdgeRecord, GroupPartition, WeightedDigraph
from ..domain.models import ROLES, BrokerageProfile, RetentionReport, Role
from ..domain.stats import ComparisonReport, EcdfCurve

logger = logging.getLogger(__name__)

EDGE_COLUMNS = ["source", "target", "weight"]
PARTITION_COLUMNS = ["node", "group"]
PROFILE_COLUMNS = (
    ["node", "group"]
    + [f"{role.value}_count" for role in ROLES]
    + [f"{role.value}_norm" for role in ROLES]
)
REPORT_COLUMNS = ["role", "kind", "coefficient", "p_value", "n"]
TOPDIFF_COLUMNS = ["role", "rank", "node", "score_a", "score_b", "abs_diff"]
ECDF_COLUMNS = ["role", "method", "value", "cum_fraction"]
SWEEP_COLUMNS = ["method", "level", "nodes_before", "nodes_retained", "edges_before", "edges_after", "all_nodes_retained"]

FLOAT_FORMAT = "%.12g"
# Written scores carry 12 significant digits
_SCORE_TOLERANCE = 1e-9


class EdgeListFormat(BaseModel):
    model_config = ConfigDict(frozen=True)

    delimiter: str = ","
    has_header: bool = True

    @field_validator("delimiter")
    @classmethod
    def _single_char(cls, v: str) -> str:
        if len(v) != 1:
            raise ValueError("delimiter must be a single character")
        return v


class MatrixInput(BaseModel):
    model_config = ConfigDict(frozen=True)

    paths: list[Path] = Field(min_length=1)
    aggregate: bool = False
    drop_self_loops: bool = False


# --- Reading ---

def _read_table(path: Path, columns: list[str], sep: str = ",", has_header: bool = True) -> tuple[pd.DataFrame, int]:
    """Read a text table as strings. Returns the frame and the file line of its first row."""
    try:
        df = pd.read_csv(
            path,
            sep=sep,
            header=0 if has_header else None,
            names=None if has_header else columns,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=False,
            encoding="utf-8",
        )
    except FileNotFoundError:
        raise InputFormatError("file not found", source=str(path)) from None
    except UnicodeDecodeError as e:
        raise InputFormatError(f"invalid UTF-8 (byte offset {e.start})", source=str(path)) from None
    except pd.errors.EmptyDataError:
        if has_header:
            raise InputFormatError(f"missing header, expected {','.join(columns)}", source=str(path), line=1) from None
        return pd.DataFrame(columns=columns), 1
    except pd.errors.ParserError as e:
        m = re.search(r"line (\d+)", str(e))
        raise InputFormatError(
            f"malformed row ({str(e).strip().splitlines()[-1]})",
            source=str(path),
            line=int(m.group(1)) if m else None,
        ) from None

    if len(df) and not isinstance(df.index, pd.RangeIndex):
        # pandas turns surplus leading fields into an implicit index
        raise InputFormatError(
            f"malformed row, expected {len(columns)} fields", source=str(path), line=2 if has_header else 1
        )
    if has_header:
        header = [str(c).strip() for c in df.columns]
        if header != columns:
            raise InputFormatError(
                f"expected header {','.join(columns)}, found {','.join(header)}", source=str(path), line=1
            )
        df.columns = columns
    return df, 2 if has_header else 1


def _rows(df: pd.DataFrame, first_line: int) -> Iterable[tuple[int, list[str]]]:
    """Rows with their file line numbers; empty lines are skipped, fields are kept verbatim."""
    for offset, row in enumerate(df.itertuples(index=False, name=None)):
        if all(pd.isna(v) for v in row):
            continue
        fields = ["" if pd.isna(v) else str(v) for v in row]
        yield first_line + offset, fields


def _parse_weight(raw: str, path: Path, line: int) -> float:
    try:
        w = float(raw)
    except ValueError:
        raise InputFormatError(f"non-numeric weight {raw!r}", source=str(path), line=line) from None
    if not math.isfinite(w) or w <= 0:
        raise InputFormatError(f"weight must be positive and finite, got {raw!r}", source=str(path), line=line)
    return w


def read_edge_list(path: Path | str, fmt: EdgeListFormat = EdgeListFormat()) -> list[EdgeRecord]:
    path = Path(path)
    df, first = _read_table(path, EDGE_COLUMNS, sep=fmt.delimiter, has_header=fmt.has_header)
    records: list[EdgeRecord] = []
    for line, (source, target, raw) in _rows(df, first):
        if not source or not target or not raw:
            raise InputFormatError("malformed row, expected source,target,weight", source=str(path), line=line)
        records.append((source, target, _parse_weight(raw, path, line)))
    logger.info("Read %d edge record(s) from %s", len(records), path)
    return records


def read_partition(path: Path | str) -> GroupPartition:
    path = Path(path)
    df, first = _read_table(path, PARTITION_COLUMNS)
    assignment: dict[str, str] = {}
    for line, (node, group) in _rows(df, first):
        if not node:
            raise InputFormatError("empty node field", source=str(path), line=line)
        if not group:
            raise InputFormatError(f"empty group for node {node!r}", source=str(path), line=line)
        if node in assignment:
            raise InputFormatError(f"duplicate node {node!r}", source=str(path), line=line)
        assignment[node] = group
    logger.info("Read partition of %d node(s) into %d group(s) from %s", len(assignment), len(set(assignment.values())), path)
    return GroupPartition(assignment)


def _read_matrix(path: Path) -> pd.DataFrame:
    try:
        raw = pd.read_csv(path, index_col=0, dtype=str, keep_default_na=False, encoding="utf-8")
    except FileNotFoundError:
        raise InputFormatError("file not found", source=str(path)) from None
    except UnicodeDecodeError as e:
        raise InputFormatError(f"invalid UTF-8 (byte offset {e.start})", source=str(path)) from None
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise InputFormatError(f"malformed matrix ({str(e).strip().splitlines()[-1]})", source=str(path)) from None

    raw.index = [str(label) for label in raw.index]
    raw.columns = [str(label) for label in raw.columns]
    if raw.shape[0] != raw.shape[1]:
        raise InputFormatError(f"matrix is not square ({raw.shape[0]} x {raw.shape[1]})", source=str(path))
    if list(raw.index) != list(raw.columns):
        raise InputFormatError("row labels differ from column labels", source=str(path))
    if len(set(raw.index)) != len(raw.index):
        raise InputFormatError("duplicate matrix labels", source=str(path))

    values = raw.apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    bad = ~np.isfinite(values.to_numpy(dtype=np.float64, na_value=np.nan))
    if bad.any():
        i, j = (int(x) for x in np.argwhere(bad)[0])
        raise InputFormatError(
            f"non-numeric entry {raw.iat[i, j]!r} at ({raw.index[i]}, {raw.columns[j]})", source=str(path), line=i + 2
        )
    negative = values.to_numpy(dtype=np.float64) < 0
    if negative.any():
        i, j = (int(x) for x in np.argwhere(negative)[0])
        raise InputFormatError(
            f"negative entry at ({raw.index[i]}, {raw.columns[j]})", source=str(path), line=i + 2
        )
    return values.astype(np.float64)


def read_adjacency_matrices(spec: MatrixInput) -> list[EdgeRecord]:
    if len(spec.paths) > 1 and not spec.aggregate:
        raise InputFormatError("several matrices given without aggregation", source=str(spec.paths[1]))

    total: pd.DataFrame | None = None
    for path in spec.paths:
        m = _read_matrix(Path(path))
        if total is None:
            total = m
            continue
        if list(m.index) != list(total.index):
            raise InputFormatError("matrix labels differ from the first matrix", source=str(path))
        total = total + m
    assert total is not None

    labels = list(total.index)
    z = total.to_numpy(dtype=np.float64)
    diag = np.flatnonzero(np.diag(z) > 0)
    if diag.size and not spec.drop_self_loops:
        raise InputFormatError(
            f"positive diagonal entry for {labels[diag[0]]!r} (self-loop); drop self-loops to discard",
            source=str(spec.paths[0]),
        )

    records: list[EdgeRecord] = []
    for r, s in zip(*np.nonzero(z)):
        if r != s:
            records.append((labels[r], labels[s], float(z[r, s])))
    logger.info(
        "Read %d matrix file(s) (%d labels): %d edge(s), %d self-loop(s) dropped",
        len(spec.paths), len(labels), len(records), diag.size,
    )
    return records


def edges_to_matrix(records: Sequence[EdgeRecord], labels: Sequence[str]) -> pd.DataFrame:
    out = pd.DataFrame(0.0, index=list(labels), columns=list(labels))
    for source, target, w in records:
        out.at[source, target] = w
    return out


def read_profile(path: Path | str) -> BrokerageProfile:
    path = Path(path)
    df, first = _read_table(path, PROFILE_COLUMNS)
    nodes: list[str] = []
    groups: list[str] = []
    counts: list[list[int]] = []
    written: list[list[float]] = []
    lines: list[int] = []
    for line, fields in _rows(df, first):
        node, group = fields[0], fields[1]
        if not node or not group:
            raise InputFormatError("empty node or group field", source=str(path), line=line)
        try:
            row_counts = [int(v) for v in fields[2:7]]
            row_scores = [float(v) for v in fields[7:12]]
        except ValueError:
            raise InputFormatError("non-numeric count or score", source=str(path), line=line) from None
        if any(c < 0 for c in row_counts):
            raise InputFormatError("negative count", source=str(path), line=line)
        nodes.append(node)
        groups.append(group)
        counts.append(row_counts)
        written.append(row_scores)
        lines.append(line)
    if not nodes:
        raise InputFormatError("profile has no rows", source=str(path))
    if len(set(nodes)) != len(nodes):
        raise InputFormatError("duplicate node rows", source=str(path))

    order = sorted(range(len(nodes)), key=lambda i: nodes[i])
    try:
        profile = profile_from_counts(
            [nodes[i] for i in order], [groups[i] for i in order], np.array([counts[i] for i in order], dtype=np.int64)
        )
    except ValueError as e:
        raise InputFormatError(str(e), source=str(path)) from None

    scores = np.array([written[i] for i in order], dtype=np.float64)
    off = np.argwhere(np.abs(scores - profile.scores) > _SCORE_TOLERANCE)
    if off.size:
        i, code = (int(x) for x in off[0])
        raise InputFormatError(
            f"{ROLES[code].value}_norm disagrees with count / denominator for node {profile.nodes[i]!r}",
            source=str(path),
            line=lines[order[i]],
        )
    return profile


# --- Writing ---

def _write_frames(path: Path | str, frames: Sequence[pd.DataFrame]) -> None:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            for i, frame in enumerate(frames):
                if i:
                    fh.write("\n")
                frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, na_rep="NA", lineterminator="\n")
    except OSError as e:
        raise OutputError(f"cannot write ({e.strerror or e})", source=str(path)) from None
    logger.info("Wrote %s", path)


def write_profile(profile: BrokerageProfile, path: Path | str) -> None:
    order = sorted(range(len(profile.nodes)), key=lambda i: profile.nodes[i])
    data: dict[str, list] = {
        "node": [profile.nodes[i] for i in order],
        "group": [profile.groups[i] for i in order],
    }
    for role in ROLES:
        data[f"{role.value}_count"] = profile.counts[order, role.code].astype(np.int64)
    for role in ROLES:
        data[f"{role.value}_norm"] = profile.scores[order, role.code].astype(np.float64)
    _write_frames(path, [pd.DataFrame(data, columns=PROFILE_COLUMNS)])


def write_adjacency_matrix(g: WeightedDigraph, path: Path | str) -> None:
    """Square matrix CSV, the layout read_adjacency_matrices accepts."""
    frame = edges_to_matrix(list(g.edges()), g.nodes)
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="") as fh:
            frame.to_csv(fh, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OutputError(f"cannot write ({e.strerror or e})", source=str(path)) from None
    logger.info("Wrote %d x %d matrix to %s", g.n, g.n, path)


def write_partition(partition: GroupPartition, path: Path | str) -> None:
    nodes = sorted(partition.assignment)
    df = pd.DataFrame({"node": nodes, "group": [partition.assignment[n] for n in nodes]}, columns=PARTITION_COLUMNS)
    _write_frames(path, [df])


def write_edge_list(g: WeightedDigraph, path: Path | str) -> None:
    rows = list(g.edges())
    df = pd.DataFrame(rows, columns=EDGE_COLUMNS)
    path = Path(path)
    try:
        # repr-precision weights; reduced graphs are binary anyway
        df.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write ({e.strerror or e})", source=str(path)) from None
    logger.info("Wrote %d edge(s) to %s", len(rows), path)


def write_report(report: ComparisonReport, path: Path | str) -> None:
    corr_rows = []
    top_rows = []
    for rc in report.roles:
        for result in (rc.pearson, rc.spearman):
            corr_rows.append((rc.role.value, result.kind.value, result.coefficient, result.p_value, result.n))
        for d in rc.top:
            top_rows.append((rc.role.value, d.rank, d.node, d.score_a, d.score_b, d.abs_diff))
    corr = pd.DataFrame(corr_rows, columns=REPORT_COLUMNS).astype({"coefficient": "float64", "p_value": "float64"})
    top = pd.DataFrame(top_rows, columns=TOPDIFF_COLUMNS)
    _write_frames(path, [corr, top])


def write_ecdf(curves: Iterable[tuple[Role, str, EcdfCurve]], path: Path | str) -> None:
    """Rows ordered by role, then method in the order given, then value."""
    by_role: dict[Role, list[tuple[str, EcdfCurve]]] = {role: [] for role in ROLES}
    for role, method, curve in curves:
        by_role[Role(role)].append((method, curve))
    rows = [
        (role.value, method, value, fraction)
        for role in ROLES
        for method, curve in by_role[role]
        for value, fraction in curve.points
    ]
    _write_frames(path, [pd.DataFrame(rows, columns=ECDF_COLUMNS)])


def write_retention_sweep(method: str, sweep: Sequence[tuple[float, RetentionReport]], path: Path | str) -> None:
    rows = [
        (method, level, r.nodes_before, r.nodes_retained, r.edges_before, r.edges_after, str(r.all_nodes_retained).lower())
        for level, r in sweep
    ]
    _write_frames(path, [pd.DataFrame(rows, columns=SWEEP_COLUMNS)])
