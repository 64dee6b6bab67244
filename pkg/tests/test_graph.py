from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import partitioned_graphs
from wngf.core.errors import GraphError, PartitionError
from wngf.domain.graph import GroupPartition, WeightedDigraph, attach_partition, build_graph, group_sizes, weight


class TestBuildGraph:
    def test_two_edges(self) -> None:
        g = build_graph([("A", "B", 2.0), ("B", "C", 3.0)])
        assert g.nodes == ("A", "B", "C")
        assert g.edge_count == 2

    def test_drop_self_loops(self) -> None:
        g = build_graph([("A", "A", 5.0), ("A", "B", 1.0)], drop_self_loops=True)
        assert g.n == 2
        assert g.edge_count == 1

    def test_self_loop_only_node_is_kept(self) -> None:
        g = build_graph([("C", "C", 5.0), ("A", "B", 1.0)], drop_self_loops=True)
        assert g.nodes == ("A", "B", "C")
        assert g.out_degree()[g.index_of("C")] == 0

    def test_self_loop_rejected_by_default(self) -> None:
        with pytest.raises(GraphError, match="self-loop"):
            build_graph([("A", "A", 5.0)])

    @pytest.mark.parametrize("w", [0.0, -1.0])
    def test_non_positive_weight(self, w: float) -> None:
        with pytest.raises(GraphError, match="non-positive"):
            build_graph([("A", "B", w)])

    @pytest.mark.parametrize("w", [float("nan"), float("inf")])
    def test_non_finite_weight(self, w: float) -> None:
        with pytest.raises(GraphError, match="non-finite"):
            build_graph([("A", "B", w)])

    def test_duplicate_edge(self) -> None:
        with pytest.raises(GraphError, match="duplicate edge A->B"):
            build_graph([("A", "B", 1.0), ("A", "B", 2.0)])

    def test_empty(self) -> None:
        with pytest.raises(GraphError, match="no nodes"):
            build_graph([])

    def test_extra_nodes_join_without_edges(self) -> None:
        g = build_graph([("A", "B", 1.0)], extra_nodes=["Z"])
        assert g.nodes == ("A", "B", "Z")
        assert g.edge_count == 1

    def test_extra_nodes_alone(self) -> None:
        g = build_graph([], extra_nodes=["A", "B"])
        assert g.n == 2
        assert g.edge_count == 0

    @settings(max_examples=60, deadline=None)
    @given(pg=partitioned_graphs(), data=st.data())
    def test_record_order_does_not_matter(self, pg, data: st.DataObject) -> None:
        records = list(pg.graph.edges())
        shuffled = data.draw(st.permutations(records))
        g = build_graph(shuffled, extra_nodes=pg.graph.nodes)
        assert g.nodes == pg.graph.nodes
        assert np.array_equal(g.matrix, pg.graph.matrix)
        assert list(g.edges()) == records


class TestWeight:
    def test_present_and_absent(self) -> None:
        g = build_graph([("A", "B", 2.0)])
        assert weight(g, "A", "B") == 2.0
        assert weight(g, "B", "A") == 0.0

    def test_unknown_node(self) -> None:
        g = build_graph([("A", "B", 2.0)])
        with pytest.raises(GraphError, match="'Z'"):
            weight(g, "A", "Z")


class TestAccessors:
    def test_strength_and_degree(self) -> None:
        g = build_graph([("A", "B", 2.0), ("A", "C", 3.0), ("C", "B", 1.0)])
        assert g.out_strength().tolist() == [5.0, 0.0, 1.0]
        assert g.in_strength().tolist() == [0.0, 3.0, 3.0]
        assert g.out_degree().tolist() == [2, 0, 1]
        assert g.in_degree().tolist() == [0, 2, 1]

    def test_edges_in_index_order(self) -> None:
        g = build_graph([("C", "A", 1.0), ("A", "C", 2.0), ("A", "B", 3.0)])
        assert list(g.edges()) == [("A", "B", 3.0), ("A", "C", 2.0), ("C", "A", 1.0)]

    def test_matrix_is_read_only(self) -> None:
        g = build_graph([("A", "B", 2.0)])
        with pytest.raises(ValueError):
            g.matrix[0, 1] = 5.0

    def test_scaled_and_binarized(self) -> None:
        g = build_graph([("A", "B", 2.0), ("B", "A", 0.5)])
        assert g.scaled(4.0).weight("A", "B") == 8.0
        assert np.array_equal(g.binarized().matrix, [[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(GraphError):
            g.scaled(0.0)

    def test_from_matrix_rejects_diagonal(self) -> None:
        with pytest.raises(GraphError, match="self-loops"):
            WeightedDigraph.from_matrix(["A", "B"], np.array([[1.0, 0.0], [0.0, 0.0]]))

    def test_from_matrix_requires_sorted_labels(self) -> None:
        with pytest.raises(GraphError, match="sorted"):
            WeightedDigraph.from_matrix(["B", "A"], np.zeros((2, 2)))


class TestPartition:
    def test_sizes(self) -> None:
        g = build_graph([("A", "B", 1.0), ("B", "C", 1.0)])
        pg = attach_partition(g, GroupPartition({"A": "G1", "B": "G1", "C": "G2"}))
        assert group_sizes(pg) == {"G1": 2, "G2": 1}
        assert pg.group("C") == "G2"
        assert pg.group_labels == ("G1", "G2")
        assert pg.group_codes.tolist() == [0, 0, 1]

    def test_missing_node_listed(self) -> None:
        g = build_graph([("A", "B", 1.0), ("B", "C", 1.0)])
        with pytest.raises(PartitionError, match="missing from partition: C"):
            attach_partition(g, GroupPartition({"A": "G1", "B": "G1"}))

    def test_unknown_node_listed(self) -> None:
        g = build_graph([("A", "B", 1.0), ("B", "C", 1.0)])
        with pytest.raises(PartitionError, match="unknown node\\(s\\): D"):
            attach_partition(g, GroupPartition({"A": "X", "B": "X", "C": "Y", "D": "Y"}))

    def test_single_group(self) -> None:
        g = build_graph([("A", "B", 1.0), ("B", "C", 1.0)])
        pg = attach_partition(g, GroupPartition({"A": "G", "B": "G", "C": "G"}))
        assert group_sizes(pg) == {"G": 3}

    def test_singleton_groups(self) -> None:
        g = build_graph([("A", "B", 1.0), ("B", "C", 1.0)])
        pg = attach_partition(g, GroupPartition({"A": "1", "B": "2", "C": "3"}))
        sizes = group_sizes(pg)
        assert len(sizes) == 3
        assert set(sizes.values()) == {1}

    def test_empty_group_label(self) -> None:
        with pytest.raises(PartitionError, match="empty group"):
            GroupPartition({"A": ""})
