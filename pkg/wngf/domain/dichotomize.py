from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

from ..core.errors import DichotomizationError
from .graph import WeightedDigraph
from .models import DichotomizationSpec, RetentionReport

logger = logging.getLogger(__name__)

DEFAULT_FRACTIONS: tuple[float, ...] = (0.05, 0.10, 0.20, 0.30, 0.40, 0.50, 0.60)
DEFAULT_ALPHAS: tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(1, 11))


def _reduced(g: WeightedDigraph, keep: np.ndarray, keep_weights: bool) -> WeightedDigraph:
    z = np.where(keep, g.matrix if keep_weights else 1.0, 0.0)
    return WeightedDigraph.from_matrix(g.nodes, z)


def _check_fraction(fraction: float) -> None:
    if not (0.0 <= fraction < 1.0):
        raise DichotomizationError(f"fraction must be in [0, 1), got {fraction!r}")


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0):
        raise DichotomizationError(f"alpha must be in (0, 1], got {alpha!r}")


def removal_quota(fraction: float, m: int) -> int:
    """floor(fraction * m), taking the fraction at its decimal value (0.29 * 100 is 29)."""
    _check_fraction(fraction)
    return math.floor(Fraction(repr(float(fraction))) * m)


def threshold_cut(g: WeightedDigraph, fraction: float, keep_weights: bool = False) -> WeightedDigraph:
    m = g.edge_count
    k = removal_quota(fraction, m)

    src, tgt = np.nonzero(g.matrix)
    w = g.matrix[src, tgt]
    # node indices follow label order, so this is (weight, source label, target label)
    order = np.lexsort((tgt, src, w))
    keep = g.adjacency.copy()
    keep[src[order[:k]], tgt[order[:k]]] = False

    logger.info("threshold_cut fraction=%g removed %d of %d edges", fraction, k, m)
    return _reduced(g, keep, keep_weights)


def disparity_significance(p: float, k: int) -> float:
    """Probability under the uniform null that a degree-k node gives an edge share >= p."""
    if not (0.0 < p <= 1.0):
        raise DichotomizationError(f"normalized weight must be in (0, 1], got {p!r}")
    if int(k) != k or k < 1:
        raise DichotomizationError(f"degree must be a positive integer, got {k!r}")
    return (1.0 - p) ** (k - 1)


def _direction_passes(weights: np.ndarray, strength: np.ndarray, degree: np.ndarray, alpha: float) -> np.ndarray:
    p = weights / strength
    significance = np.power(1.0 - p, degree - 1)
    return (degree == 1) | (significance < alpha)


def backbone(g: WeightedDigraph, alpha: float, keep_weights: bool = False) -> WeightedDigraph:
    _check_alpha(alpha)
    src, tgt = np.nonzero(g.matrix)
    w = g.matrix[src, tgt]

    out_ok = _direction_passes(w, g.out_strength()[src], g.out_degree()[src], alpha)
    in_ok = _direction_passes(w, g.in_strength()[tgt], g.in_degree()[tgt], alpha)
    survives = out_ok | in_ok
    if alpha >= 1.0:
        # p > 0 puts every significance below 1, even where 1 - p rounds to 1.0
        survives[:] = True

    keep = np.zeros_like(g.adjacency)
    keep[src[survives], tgt[survives]] = True
    logger.info("backbone alpha=%g kept %d of %d edges", alpha, int(survives.sum()), src.size)
    return _reduced(g, keep, keep_weights)


def dichotomize(g: WeightedDigraph, spec: DichotomizationSpec) -> WeightedDigraph:
    if spec.method == "threshold":
        return threshold_cut(g, spec.fraction, keep_weights=spec.keep_weights)  # type: ignore[arg-type]
    return backbone(g, spec.alpha, keep_weights=spec.keep_weights)  # type: ignore[arg-type]


def retention_report(original: WeightedDigraph, reduced: WeightedDigraph) -> RetentionReport:
    extra = sorted(set(reduced.nodes) - set(original.nodes))
    if extra:
        raise DichotomizationError(f"reduced graph has node(s) not in the original: {', '.join(extra)}")

    adj = reduced.adjacency
    incident = adj.any(axis=0) | adj.any(axis=1)
    touched = {node for node, hit in zip(reduced.nodes, incident.tolist()) if hit}
    isolated = tuple(node for node in original.nodes if node not in touched)
    return RetentionReport(
        nodes_before=original.n,
        nodes_retained=original.n - len(isolated),
        edges_before=original.edge_count,
        edges_after=reduced.edge_count,
        isolated=isolated,
    )


def retention_sweep(
    g: WeightedDigraph,
    method: Literal["threshold", "backbone"],
    levels: Optional[Iterable[float]] = None,
) -> list[tuple[float, RetentionReport]]:
    if levels is None:
        levels = DEFAULT_FRACTIONS if method == "threshold" else DEFAULT_ALPHAS
    levels = sorted(set(levels))
    for level in levels:
        _check_fraction(level) if method == "threshold" else _check_alpha(level)

    out: list[tuple[float, RetentionReport]] = []
    for level in levels:
        spec = (
            DichotomizationSpec(method="threshold", fraction=level)
            if method == "threshold"
            else DichotomizationSpec(method="backbone", alpha=level)
        )
        report = retention_report(g, dichotomize(g, spec))
        logger.debug("sweep %s: %s", spec.describe(), report.summary())
        out.append((level, report))
    return out


def best_retaining_level(
    method: Literal["threshold", "backbone"],
    sweep: Sequence[tuple[float, RetentionReport]],
) -> Optional[float]:
    """Largest fraction (threshold) or smallest alpha (backbone) that keeps every node."""
    ok = [level for level, report in sweep if report.all_nodes_retained]
    if not ok:
        return None
    return max(ok) if method == "threshold" else min(ok)
