from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from wngf.domain.graph import GroupPartition, PartitionedGraph, WeightedDigraph, attach_partition

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def labels(n: int) -> list[str]:
    return [f"n{i:03d}" for i in range(n)]


def random_partitioned(
    seed: int,
    n: int,
    density: float,
    group_count: int,
    low: float = 1e-3,
    high: float = 1e3,
) -> PartitionedGraph:
    """Random weighted digraph with log-uniform weights and a random partition."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    np.fill_diagonal(mask, False)
    weights = np.exp(rng.uniform(np.log(low), np.log(high), size=(n, n)))
    z = np.where(mask, weights, 0.0)
    nodes = labels(n)
    groups = rng.integers(0, min(group_count, n), size=n)
    partition = GroupPartition({node: f"G{g}" for node, g in zip(nodes, groups.tolist())})
    return attach_partition(WeightedDigraph.from_matrix(nodes, z), partition)


@st.composite
def partitioned_graphs(draw: st.DrawFn, min_nodes: int = 3, max_nodes: int = 30) -> PartitionedGraph:
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    n = draw(st.integers(min_value=min_nodes, max_value=max_nodes))
    density = draw(st.sampled_from([0.1, 0.5, 1.0]))
    group_count = draw(st.sampled_from([1, 2, 3, 5]))
    return random_partitioned(seed, n, density, group_count)


@pytest.fixture
def write_text(tmp_path: Path):
    def _write(name: str, content: str) -> Path:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return _write
