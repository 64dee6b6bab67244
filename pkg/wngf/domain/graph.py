from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from ..core.errors import GraphError, PartitionError

logger = logging.getLogger(__name__)

EdgeRecord = tuple[str, str, float]


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Immutable weighted digraph.

    Nodes are indexed in lexicographic label order. Weights live in a dense
    ``(n, n)`` matrix where 0 means "no edge", so weight lookup is O(1).
    """

    nodes: tuple[str, ...]
    _matrix: np.ndarray
    _index: Mapping[str, int]

    @classmethod
    def from_matrix(cls, nodes: Sequence[str], matrix: np.ndarray) -> "WeightedDigraph":
        labels = tuple(nodes)
        if not labels:
            raise GraphError("graph has no nodes")
        if list(labels) != sorted(set(labels)):
            raise GraphError("node labels must be unique and sorted")
        z = np.array(matrix, dtype=np.float64, copy=True)
        n = len(labels)
        if z.shape != (n, n):
            raise GraphError(f"matrix shape {z.shape} does not match {n} nodes")
        if not np.all(np.isfinite(z)) or np.any(z < 0):
            raise GraphError("weights must be finite and positive")
        if np.any(np.diag(z) != 0):
            raise GraphError("self-loops are not allowed")
        z.setflags(write=False)
        index = MappingProxyType({label: i for i, label in enumerate(labels)})
        return cls(labels, z, index)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def matrix(self) -> np.ndarray:
        """Read-only weight matrix, ``matrix[q, s]`` = weight of q->s or 0."""
        return self._matrix

    @property
    def adjacency(self) -> np.ndarray:
        return self._matrix > 0

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(self._matrix))

    def index_of(self, node: str) -> int:
        try:
            return self._index[node]
        except KeyError:
            raise GraphError(f"unknown node {node!r}") from None

    def weight(self, q: str, s: str) -> float:
        return float(self._matrix[self.index_of(q), self.index_of(s)])

    def has_edge(self, q: str, s: str) -> bool:
        return self.weight(q, s) > 0

    def edges(self) -> Iterator[EdgeRecord]:
        """Edges in (source index, target index) order."""
        src, tgt = np.nonzero(self._matrix)
        for i, j in zip(src.tolist(), tgt.tolist()):
            yield self.nodes[i], self.nodes[j], float(self._matrix[i, j])

    def out_strength(self) -> np.ndarray:
        return self._matrix.sum(axis=1)

    def in_strength(self) -> np.ndarray:
        return self._matrix.sum(axis=0)

    def out_degree(self) -> np.ndarray:
        return np.count_nonzero(self._matrix, axis=1)

    def in_degree(self) -> np.ndarray:
        return np.count_nonzero(self._matrix, axis=0)

    def scaled(self, factor: float) -> "WeightedDigraph":
        if not (factor > 0 and math.isfinite(factor)):
            raise GraphError(f"scale factor must be positive and finite, got {factor}")
        return WeightedDigraph.from_matrix(self.nodes, self._matrix * factor)

    def binarized(self) -> "WeightedDigraph":
        return WeightedDigraph.from_matrix(self.nodes, self.adjacency.astype(np.float64))


def build_graph(
    edge_records: Iterable[EdgeRecord],
    drop_self_loops: bool = False,
    extra_nodes: Iterable[str] = (),
) -> WeightedDigraph:
    records = list(edge_records)
    labels: set[str] = set(extra_nodes)
    kept: list[EdgeRecord] = []
    dropped_loops = 0

    for source, target, weight in records:
        w = float(weight)
        if not math.isfinite(w):
            raise GraphError(f"non-finite weight on edge {source}->{target}")
        if w <= 0:
            raise GraphError(f"non-positive weight {w:g} on edge {source}->{target}")
        if source == target:
            if not drop_self_loops:
                raise GraphError(f"self-loop on {source!r} (use drop_self_loops to discard)")
            # the record still names a node
            dropped_loops += 1
            labels.add(source)
            continue
        labels.update((source, target))
        kept.append((source, target, w))

    if not labels:
        raise GraphError("graph has no nodes")
    if dropped_loops:
        logger.info("Dropped %d self-loop record(s)", dropped_loops)

    nodes = sorted(labels)
    index = {label: i for i, label in enumerate(nodes)}
    z = np.zeros((len(nodes), len(nodes)), dtype=np.float64)
    for source, target, w in kept:
        i, j = index[source], index[target]
        if z[i, j] != 0:
            raise GraphError(f"duplicate edge {source}->{target}")
        z[i, j] = w

    g = WeightedDigraph.from_matrix(nodes, z)
    logger.debug("Built graph: %d nodes, %d edges", g.n, g.edge_count)
    return g


def weight(g: WeightedDigraph, q: str, s: str) -> float:
    return g.weight(q, s)


@dataclass(frozen=True)
class GroupPartition:
    assignment: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "assignment", MappingProxyType(dict(self.assignment)))
        empty = sorted(node for node, group in self.assignment.items() if not group)
        if empty:
            raise PartitionError(f"empty group label for node(s): {', '.join(empty)}")

    def __len__(self) -> int:
        return len(self.assignment)


@dataclass(frozen=True, eq=False)
class PartitionedGraph:
    graph: WeightedDigraph
    partition: GroupPartition
    group_labels: tuple[str, ...]
    group_codes: np.ndarray  # per node (graph index order): index into group_labels

    def group(self, node: str) -> str:
        self.graph.index_of(node)
        return self.partition.assignment[node]

    def groups_in_order(self) -> tuple[str, ...]:
        return tuple(self.partition.assignment[node] for node in self.graph.nodes)

    def group_sizes(self) -> dict[str, int]:
        counts = np.bincount(self.group_codes, minlength=len(self.group_labels))
        return {label: int(c) for label, c in zip(self.group_labels, counts)}


def attach_partition(g: WeightedDigraph, p: GroupPartition) -> PartitionedGraph:
    nodes = set(g.nodes)
    assigned = set(p.assignment)
    missing = sorted(nodes - assigned)
    if missing:
        raise PartitionError(f"node(s) missing from partition: {', '.join(missing)}")
    unknown = sorted(assigned - nodes)
    if unknown:
        raise PartitionError(f"partition entry for unknown node(s): {', '.join(unknown)}")

    groups = [p.assignment[node] for node in g.nodes]
    labels = tuple(sorted(set(groups)))
    code_of = {label: i for i, label in enumerate(labels)}
    codes = np.fromiter((code_of[x] for x in groups), dtype=np.int64, count=len(groups))
    codes.setflags(write=False)
    logger.debug("Partition attached: %d group(s) %s", len(labels), dict(Counter(groups)))
    return PartitionedGraph(g, p, labels, codes)


def group_sizes(pg: PartitionedGraph) -> dict[str, int]:
    return pg.group_sizes()
