from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from ..core.config import settings
from ..core.errors import StatsError
from .models import ROLES, BrokerageProfile, Role

logger = logging.getLogger(__name__)

# Below this sample size the t-approximation is flagged as unreliable
RELIABLE_N = 10

# (p-value bound, marker), strictest first
SIGNIFICANCE_STARS = ((0.001, "***"), (0.01, "**"), (0.05, "*"))


class CorrelationKind(str, Enum):
    PEARSON = "pearson"
    SPEARMAN = "spearman"


@dataclass(frozen=True)
class CorrelationResult:
    kind: CorrelationKind
    n: int
    coefficient: Optional[float]  # None when a vector is constant
    p_value: Optional[float]

    @property
    def defined(self) -> bool:
        return self.coefficient is not None

    @property
    def reliable(self) -> bool:
        return self.n >= RELIABLE_N

    @property
    def stars(self) -> str:
        if self.p_value is None:
            return ""
        for bound, marker in SIGNIFICANCE_STARS:
            if self.p_value <= bound:
                return marker
        return ""


@dataclass(frozen=True)
class Divergence:
    role: Role
    rank: int
    node: str
    score_a: float
    score_b: float

    @property
    def abs_diff(self) -> float:
        return abs(self.score_a - self.score_b)


@dataclass(frozen=True)
class RoleComparison:
    role: Role
    pearson: CorrelationResult
    spearman: CorrelationResult
    top: tuple[Divergence, ...]


@dataclass(frozen=True)
class ComparisonReport:
    label_a: str
    label_b: str
    k: int
    roles: tuple[RoleComparison, ...]

    def for_role(self, role: Role) -> RoleComparison:
        return self.roles[Role(role).code]


@dataclass(frozen=True)
class EcdfCurve:
    values: tuple[float, ...]
    fractions: tuple[float, ...]

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.values, self.fractions))

    def __call__(self, x: float) -> float:
        i = int(np.searchsorted(self.values, x, side="right"))
        return 0.0 if i == 0 else self.fractions[i - 1]


def _as_pair(x: Sequence[float], y: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    b = np.asarray(y, dtype=np.float64).reshape(-1)
    if a.size != b.size:
        raise StatsError(f"length mismatch: {a.size} vs {b.size}")
    if a.size < 3:
        raise StatsError(f"need at least 3 observations, got {a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise StatsError("observations must be finite")
    return a, b


def _t_p_value(r: float, n: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(min(1.0, 2.0 * sps.t.sf(abs(t), df=n - 2)))


def _correlate(a: np.ndarray, b: np.ndarray, kind: CorrelationKind) -> CorrelationResult:
    n = int(a.size)
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if denom == 0.0 or np.ptp(a) == 0 or np.ptp(b) == 0:
        return CorrelationResult(kind, n, None, None)
    r = float(np.dot(da, db)) / denom
    r = max(-1.0, min(1.0, r))
    return CorrelationResult(kind, n, r, _t_p_value(r, n))


def pearson(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    a, b = _as_pair(x, y)
    return _correlate(a, b, CorrelationKind.PEARSON)


def spearman(x: Sequence[float], y: Sequence[float]) -> CorrelationResult:
    a, b = _as_pair(x, y)
    # ties share the mean of the ranks they span
    return _correlate(sps.rankdata(a, method="average"), sps.rankdata(b, method="average"), CorrelationKind.SPEARMAN)


def ecdf(values: Sequence[float]) -> EcdfCurve:
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise StatsError("ECDF of an empty sample")
    if not np.all(np.isfinite(v)):
        raise StatsError("ECDF values must be finite")
    distinct, counts = np.unique(v, return_counts=True)
    fractions = np.cumsum(counts) / v.size
    return EcdfCurve(tuple(distinct.tolist()), tuple(fractions.tolist()))


def role_ecdfs(profile: BrokerageProfile) -> dict[Role, EcdfCurve]:
    return {role: ecdf(profile.role_scores(role)) for role in ROLES}


def _aligned(a: BrokerageProfile, b: BrokerageProfile) -> tuple[list[str], np.ndarray, np.ndarray]:
    only_a = sorted(set(a.nodes) - set(b.nodes))
    only_b = sorted(set(b.nodes) - set(a.nodes))
    if only_a or only_b:
        parts = []
        if only_a:
            parts.append(f"only in first: {', '.join(only_a)}")
        if only_b:
            parts.append(f"only in second: {', '.join(only_b)}")
        raise StatsError("profiles cover different nodes (" + "; ".join(parts) + ")")
    nodes = sorted(a.nodes)
    ia = [a.index_of(node) for node in nodes]
    ib = [b.index_of(node) for node in nodes]
    return nodes, a.scores[ia], b.scores[ib]


def top_nodes(profile: BrokerageProfile, role: Role, n: int) -> list[tuple[str, float]]:
    """The n highest-scoring nodes for a role, ties broken by node label."""
    if n < 1:
        raise StatsError(f"n must be positive, got {n}")
    scores = profile.role_scores(Role(role))
    order = sorted(range(len(profile.nodes)), key=lambda i: (-scores[i], profile.nodes[i]))[:n]
    return [(profile.nodes[i], float(scores[i])) for i in order]


def top_divergences(role: Role, nodes: Sequence[str], sa: np.ndarray, sb: np.ndarray, k: int) -> tuple[Divergence, ...]:
    diff = np.abs(sa - sb)
    order = sorted(range(len(nodes)), key=lambda i: (-diff[i], nodes[i]))[:k]
    return tuple(
        Divergence(role=role, rank=rank, node=nodes[i], score_a=float(sa[i]), score_b=float(sb[i]))
        for rank, i in enumerate(order, start=1)
    )


def compare_profiles(
    a: BrokerageProfile,
    b: BrokerageProfile,
    k: Optional[int] = None,
    label_a: str = "a",
    label_b: str = "b",
) -> ComparisonReport:
    k = k or settings.top_k
    if k < 1:
        raise StatsError(f"k must be positive, got {k}")
    nodes, sa, sb = _aligned(a, b)

    roles = []
    for role in ROLES:
        xa, xb = sa[:, role.code], sb[:, role.code]
        roles.append(
            RoleComparison(
                role=role,
                pearson=pearson(xa, xb),
                spearman=spearman(xa, xb),
                top=top_divergences(role, nodes, xa, xb, k),
            )
        )
        if not roles[-1].pearson.defined:
            logger.warning("%s: correlation undefined (constant scores)", role.value)

    if len(nodes) < RELIABLE_N:
        logger.warning("Only %d nodes; p-values are unreliable below %d", len(nodes), RELIABLE_N)
    return ComparisonReport(label_a=label_a, label_b=label_b, k=k, roles=tuple(roles))
