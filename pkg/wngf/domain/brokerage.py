from __future__ import annotations

import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from ..core.config import settings
from ..core.errors import CountingError, GraphError, OracleMismatchError, PartitionError
from .graph import PartitionedGraph
from .models import ROLES, BrokerageMode, BrokerageProfile, Role, RoleCounts

logger = logging.getLogger(__name__)

_COORDINATOR, _GATEKEEPER, _REPRESENTATIVE, _ITINERANT, _LIAISON = (role.code for role in ROLES)

BrokerPredicate = Callable[[float, float, float], bool]


def is_weighted_broker(z_qr: float, z_rs: float, z_qs: float) -> bool:
    """r brokers q->s when 1/z_qr + 1/z_rs < 1/z_qs; a missing direct edge (0) is infinite resistance."""
    if not (z_qr > 0 and z_rs > 0):
        raise GraphError(f"two-path weights must be positive, got {z_qr!r} and {z_rs!r}")
    if z_qs < 0:
        raise GraphError(f"direct weight must be non-negative, got {z_qs!r}")
    if z_qs == 0:
        return True
    return 1.0 / z_qr + 1.0 / z_rs < 1.0 / z_qs


def is_binary_broker(edge_qr_exists: bool, edge_rs_exists: bool, edge_qs_exists: bool) -> bool:
    return edge_qr_exists and edge_rs_exists and not edge_qs_exists


def _binary_predicate(z_qr: float, z_rs: float, z_qs: float) -> bool:
    return is_binary_broker(z_qr > 0, z_rs > 0, z_qs > 0)


def _predicate(mode: BrokerageMode) -> BrokerPredicate:
    return is_weighted_broker if mode is BrokerageMode.WEIGHTED else _binary_predicate


def classify_role(g_q: str, g_r: str, g_s: str) -> Role:
    if g_r == g_s:
        return Role.COORDINATOR if g_q == g_r else Role.GATEKEEPER
    if g_q == g_r:
        return Role.REPRESENTATIVE
    if g_q == g_s:
        return Role.ITINERANT
    return Role.LIAISON


# --- Triad enumeration ---

@dataclass(frozen=True)
class _Workspace:
    adjacency: np.ndarray  # bool (n, n)
    inverse: np.ndarray    # 1 / weight, +inf where there is no edge
    codes: np.ndarray      # group code per node


def _prepare(pg: PartitionedGraph) -> _Workspace:
    z = pg.graph.matrix
    with np.errstate(divide="ignore"):
        inverse = 1.0 / z
    return _Workspace(adjacency=z > 0, inverse=inverse, codes=pg.group_codes)


def _role_codes(gq: np.ndarray, gr: int, gs: np.ndarray) -> np.ndarray:
    """Vectorized classify_role over in-neighbor groups x out-neighbor groups."""
    shape = (gq.size, gs.size)
    same_qr = np.broadcast_to((gq == gr)[:, None], shape)
    same_rs = np.broadcast_to((gs == gr)[None, :], shape)
    same_qs = gq[:, None] == gs[None, :]
    return np.select(
        [same_qr & same_rs, same_rs, same_qr, same_qs],
        [_COORDINATOR, _GATEKEEPER, _REPRESENTATIVE, _ITINERANT],
        default=_LIAISON,
    )


def _broker_triads(ws: _Workspace, r: int, mode: BrokerageMode):
    """In-neighbors, out-neighbors, brokered mask and role codes for broker r."""
    ins = np.flatnonzero(ws.adjacency[:, r])
    outs = np.flatnonzero(ws.adjacency[r, :])
    if mode is BrokerageMode.WEIGHTED:
        two_path = ws.inverse[ins, r][:, None] + ws.inverse[r, outs][None, :]
        # absent q->s brokers even when a subnormal weight makes the two-path infinite
        brokered = (two_path < ws.inverse[np.ix_(ins, outs)]) | ~ws.adjacency[np.ix_(ins, outs)]
    else:
        brokered = ~ws.adjacency[np.ix_(ins, outs)]
    brokered &= ins[:, None] != outs[None, :]
    roles = _role_codes(ws.codes[ins], ws.codes[r], ws.codes[outs])
    return ins, outs, brokered, roles


def _count_broker(ws: _Workspace, r: int, mode: BrokerageMode) -> np.ndarray:
    _, _, brokered, roles = _broker_triads(ws, r, mode)
    return np.bincount(roles[brokered], minlength=len(ROLES))


def count_roles(
    pg: PartitionedGraph,
    mode: BrokerageMode | str,
    workers: Optional[int] = None,
) -> RoleCounts:
    mode = BrokerageMode(mode)
    workers = workers or settings.workers
    n = pg.graph.n
    ws = _prepare(pg)
    counts = np.zeros((n, len(ROLES)), dtype=np.int64)

    started = time.perf_counter()
    if workers > 1 and n > 1:
        # each broker row is written by exactly one task
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="count_roles") as pool:
            for r, row in enumerate(pool.map(lambda b: _count_broker(ws, b, mode), range(n))):
                counts[r] = row
    else:
        for r in range(n):
            counts[r] = _count_broker(ws, r, mode)

    logger.info(
        "count_roles mode=%s nodes=%d edges=%d workers=%d brokered=%d (%.2fs)",
        mode.value, n, pg.graph.edge_count, workers, int(counts.sum()),
        time.perf_counter() - started,
    )
    return RoleCounts(pg.graph.nodes, counts)


def brute_force_counts(
    pg: PartitionedGraph,
    mode: BrokerageMode | str,
    max_nodes: Optional[int] = None,
) -> RoleCounts:
    """Literal O(n^3) loop over ordered distinct (q, r, s); test oracle for count_roles."""
    mode = BrokerageMode(mode)
    bound = max_nodes or settings.oracle_max_nodes
    g = pg.graph
    n = g.n
    if n > bound:
        raise CountingError(f"brute-force oracle limited to {bound} nodes, graph has {n}")

    broker = _predicate(mode)
    z = g.matrix.tolist()
    groups = pg.groups_in_order()
    rows = [[0] * len(ROLES) for _ in range(n)]

    for q in range(n):
        for r in range(n):
            if r == q or z[q][r] == 0:
                continue
            for s in range(n):
                if s == q or s == r or z[r][s] == 0:
                    continue
                if broker(z[q][r], z[r][s], z[q][s]):
                    rows[r][classify_role(groups[q], groups[r], groups[s]).code] += 1

    counts = np.array(rows, dtype=np.int64).reshape(n, len(ROLES))
    return RoleCounts(g.nodes, counts)


def _first_differing_triad(pg: PartitionedGraph, mode: BrokerageMode, r: int) -> Optional[tuple[str, str, str]]:
    broker = _predicate(mode)
    nodes = pg.graph.nodes
    groups = pg.groups_in_order()
    z = pg.graph.matrix.tolist()
    ins, outs, brokered, roles = _broker_triads(_prepare(pg), r, mode)
    for a, q in enumerate(ins.tolist()):
        for b, s in enumerate(outs.tolist()):
            if q == s:
                continue
            expected = broker(z[q][r], z[r][s], z[q][s])
            got = bool(brokered[a, b])
            role = classify_role(groups[q], groups[r], groups[s]).code
            if expected != got or (expected and role != int(roles[a, b])):
                return nodes[q], nodes[r], nodes[s]
    return None


def check_against_oracle(
    pg: PartitionedGraph,
    mode: BrokerageMode | str,
    counts: Optional[RoleCounts] = None,
) -> RoleCounts:
    mode = BrokerageMode(mode)
    oracle = brute_force_counts(pg, mode)
    if counts is None:
        counts = count_roles(pg, mode)
    if counts == oracle:
        logger.info("Oracle check passed (%d nodes, mode=%s)", pg.graph.n, mode.value)
        return oracle

    r, code = (int(x) for x in np.argwhere(counts.counts != oracle.counts)[0])
    node = pg.graph.nodes[r]
    message = (
        f"count_roles disagrees with brute force for broker {node!r} role {ROLES[code].value}: "
        f"fast={int(counts.counts[r, code])} oracle={int(oracle.counts[r, code])}"
    )
    triad = _first_differing_triad(pg, mode, r)
    if triad is not None:
        message += f"; first differing triad (q={triad[0]!r}, r={triad[1]!r}, s={triad[2]!r})"
    raise OracleMismatchError(message)


# --- Normalization ---

def _denominator_row(own_size: int, other_sizes: Sequence[int]) -> tuple[int, int, int, int, int]:
    others = sum(other_sizes)
    coordinator = (own_size - 1) * (own_size - 2)
    cross = others * (own_size - 1)
    itinerant = sum(m * (m - 1) for m in other_sizes)
    # ordered (j, k) pairs of distinct foreign groups
    liaison = others * others - sum(m * m for m in other_sizes)
    return coordinator, cross, cross, itinerant, liaison


def _group_denominators(own_group: str, sizes: Mapping[str, int]) -> tuple[int, int, int, int, int]:
    if own_group not in sizes:
        raise PartitionError(f"unknown group {own_group!r}")
    others = [m for group, m in sizes.items() if group != own_group]
    return _denominator_row(sizes[own_group], others)


def role_denominator(role: Role, own_group: str, sizes: Mapping[str, int]) -> int:
    return _group_denominators(own_group, sizes)[Role(role).code]


def denominator_table(groups: Sequence[str]) -> np.ndarray:
    """n_b^i for every node (rows follow ``groups``) and role."""
    sizes = Counter(groups)
    by_group = {group: _group_denominators(group, sizes) for group in sizes}
    table = np.array([by_group[group] for group in groups], dtype=np.int64)
    return table.reshape(len(groups), len(ROLES))


def profile_from_counts(nodes: Sequence[str], groups: Sequence[str], counts: np.ndarray) -> BrokerageProfile:
    counts = np.asarray(counts, dtype=np.int64).reshape(len(nodes), len(ROLES))
    den = denominator_table(groups)
    over = np.argwhere(counts > den)
    if over.size:
        i, code = (int(x) for x in over[0])
        raise CountingError(
            f"count {int(counts[i, code])} exceeds denominator {int(den[i, code])} "
            f"for node {nodes[i]!r} role {ROLES[code].value}"
        )
    scores = np.zeros(counts.shape, dtype=np.float64)
    np.divide(counts, den, out=scores, where=den > 0)
    return BrokerageProfile(
        nodes=tuple(nodes),
        groups=tuple(groups),
        counts=counts.copy(),
        denominators=den,
        scores=scores,
    )


def normalize(counts: RoleCounts, pg: PartitionedGraph) -> BrokerageProfile:
    if counts.nodes != pg.graph.nodes:
        raise CountingError("role counts were not produced from this graph")
    return profile_from_counts(pg.graph.nodes, pg.groups_in_order(), counts.counts)


def compute_profile(
    pg: PartitionedGraph,
    mode: BrokerageMode | str,
    workers: Optional[int] = None,
) -> BrokerageProfile:
    return normalize(count_roles(pg, mode, workers=workers), pg)
