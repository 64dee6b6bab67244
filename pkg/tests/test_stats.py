from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_partitioned
from wngf.core.errors import StatsError
from wngf.domain.brokerage import compute_profile
from wngf.domain.models import ROLES, Role
from wngf.domain.stats import (
    CorrelationKind,
    CorrelationResult,
    compare_profiles,
    ecdf,
    pearson,
    role_ecdfs,
    spearman,
    top_nodes,
)


def _textbook_pearson(x: np.ndarray, y: np.ndarray) -> float:
    mx, my = x.mean(), y.mean()
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    den = math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))
    return num / den


class TestCorrelation:
    @pytest.mark.parametrize(
        "x, y, expected",
        [([1, 2, 3], [2, 4, 6], 1.0), ([1, 2, 3], [3, 2, 1], -1.0), ([1, 2, 3, 4], [1, 3, 2, 4], 0.8)],
    )
    def test_pearson(self, x, y, expected: float) -> None:
        result = pearson(x, y)
        assert result.coefficient == pytest.approx(expected, abs=1e-12)
        assert result.n == len(x)

    @pytest.mark.parametrize(
        "x, y, expected",
        [([1, 2, 3], [1, 4, 9], 1.0), ([1, 2, 3], [9, 4, 1], -1.0), ([1, 2, 2, 3], [1, 2, 3, 4], 0.9486832980505138)],
    )
    def test_spearman(self, x, y, expected: float) -> None:
        assert spearman(x, y).coefficient == pytest.approx(expected, abs=1e-9)

    def test_constant_vector_is_undefined(self) -> None:
        result = pearson([1, 1, 1], [1, 2, 3])
        assert not result.defined
        assert result.p_value is None

    def test_p_value_of_perfect_fit(self) -> None:
        assert pearson([1, 2, 3, 4], [2, 4, 6, 8]).p_value == 0.0

    def test_p_value_matches_scipy(self) -> None:
        from scipy import stats as sps

        rng = np.random.default_rng(4)
        x, y = rng.normal(size=30), rng.normal(size=30)
        expected = sps.pearsonr(x, y)
        result = pearson(x, y)
        assert result.coefficient == pytest.approx(expected[0], abs=1e-12)
        assert result.p_value == pytest.approx(expected[1], rel=1e-6)
        assert result.reliable

    @pytest.mark.parametrize("x, y", [([1, 2, 3], [1, 2]), ([1, 2], [1, 2]), ([1, float("nan"), 3], [1, 2, 3])])
    def test_invalid_input(self, x, y) -> None:
        with pytest.raises(StatsError):
            pearson(x, y)

    def test_matches_textbook_formula(self) -> None:
        pg = random_partitioned(seed=20, n=20, density=0.5, group_count=3)
        a = compute_profile(pg, "wngf")
        b = compute_profile(pg, "binary")
        for role in ROLES:
            x, y = a.role_scores(role), b.role_scores(role)
            result = pearson(x, y)
            if result.defined:
                assert result.coefficient == pytest.approx(_textbook_pearson(x, y), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        x=st.lists(st.integers(-1000, 1000), min_size=3, max_size=40, unique=True),
        y=st.lists(st.integers(-1000, 1000), min_size=40, max_size=40),
    )
    def test_spearman_ignores_increasing_transforms(self, x: list[int], y: list[int]) -> None:
        y = y[: len(x)]
        cubed = [v**3 + 2 * v for v in x]
        assert spearman(cubed, y) == spearman(x, y)

    @settings(max_examples=200, deadline=None)
    @given(
        data=st.lists(
            st.tuples(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6)), min_size=3, max_size=50
        )
    )
    def test_coefficients_are_bounded(self, data: list[tuple[float, float]]) -> None:
        x, y = zip(*data)
        for result in (pearson(x, y), spearman(x, y)):
            if result.defined:
                assert -1.0 <= result.coefficient <= 1.0
                assert 0.0 <= result.p_value <= 1.0

    @pytest.mark.parametrize(
        "p_value, expected",
        [(0.0, "***"), (0.001, "***"), (0.0011, "**"), (0.01, "**"), (0.05, "*"), (0.051, ""), (None, "")],
    )
    def test_stars(self, p_value, expected: str) -> None:
        coefficient = None if p_value is None else 0.5
        assert CorrelationResult(CorrelationKind.PEARSON, 30, coefficient, p_value).stars == expected


class TestTopNodes:
    @pytest.fixture
    def profile(self):
        return compute_profile(random_partitioned(seed=8, n=20, density=0.5, group_count=3), "wngf")

    def test_highest_first(self, profile) -> None:
        ranked = top_nodes(profile, Role.LIAISON, 5)
        scores = [score for _, score in ranked]
        assert scores == sorted(scores, reverse=True)
        assert scores[0] == profile.role_scores(Role.LIAISON).max()

    def test_ties_follow_node_label(self, profile) -> None:
        flat = replace(profile, scores=np.zeros_like(profile.scores))
        assert [node for node, _ in top_nodes(flat, Role.GATEKEEPER, 3)] == sorted(profile.nodes)[:3]

    def test_n_beyond_node_count(self, profile) -> None:
        assert len(top_nodes(profile, Role.COORDINATOR, 100)) == len(profile.nodes)

    def test_n_must_be_positive(self, profile) -> None:
        with pytest.raises(StatsError):
            top_nodes(profile, Role.COORDINATOR, 0)


class TestEcdf:
    def test_ties(self) -> None:
        assert ecdf([1, 2, 2, 3]).points == [(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]

    def test_single(self) -> None:
        assert ecdf([5]).points == [(5.0, 1.0)]

    def test_empty(self) -> None:
        with pytest.raises(StatsError):
            ecdf([])

    def test_callable(self) -> None:
        curve = ecdf([1, 2, 2, 3])
        assert curve(0.5) == 0.0
        assert curve(2) == 0.75
        assert curve(2.5) == 0.75
        assert curve(10) == 1.0

    @settings(max_examples=200, deadline=None)
    @given(values=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=60))
    def test_validity(self, values: list[float]) -> None:
        curve = ecdf(values)
        assert list(curve.values) == sorted(set(curve.values))
        assert all(a < b for a, b in zip(curve.fractions, curve.fractions[1:]))
        assert curve.fractions[-1] == 1.0
        for v, f in curve.points:
            assert f == pytest.approx(sum(x <= v for x in values) / len(values))

    def test_role_ecdfs(self) -> None:
        profile = compute_profile(random_partitioned(seed=8, n=12, density=0.5, group_count=2), "wngf")
        curves = role_ecdfs(profile)
        assert set(curves) == set(ROLES)
        assert all(c.fractions[-1] == 1.0 for c in curves.values())


class TestCompareProfiles:
    @pytest.fixture
    def profile(self):
        return compute_profile(random_partitioned(seed=11, n=20, density=0.5, group_count=3), "wngf")

    def test_self_comparison(self, profile) -> None:
        report = compare_profiles(profile, profile)
        for rc in report.roles:
            if rc.pearson.defined:
                assert rc.pearson.coefficient == pytest.approx(1.0)
                assert rc.spearman.coefficient == pytest.approx(1.0)
            assert all(d.abs_diff == 0.0 for d in rc.top)

    def test_halved_scores(self, profile) -> None:
        halved = replace(profile, scores=profile.scores / 2)
        report = compare_profiles(profile, halved, k=3)
        for rc in report.roles:
            if not rc.pearson.defined:
                continue
            assert rc.pearson.coefficient == pytest.approx(1.0)
            assert rc.spearman.coefficient == pytest.approx(1.0)
            top = np.sort(profile.role_scores(rc.role))[::-1][:3] / 2
            assert [d.abs_diff for d in rc.top] == pytest.approx(top.tolist())

    def test_symmetry(self, profile) -> None:
        other = compute_profile(random_partitioned(seed=11, n=20, density=0.5, group_count=3), "binary")
        ab = compare_profiles(profile, other)
        ba = compare_profiles(other, profile)
        for x, y in zip(ab.roles, ba.roles):
            assert x.pearson.coefficient == y.pearson.coefficient
            assert [d.node for d in x.top] == [d.node for d in y.top]

    def test_default_depth_and_order(self, profile) -> None:
        report = compare_profiles(profile, profile)
        assert report.k == 5
        rc = report.for_role(Role.LIAISON)
        assert [d.rank for d in rc.top] == [1, 2, 3, 4, 5]
        # ties on difference fall back to node label order
        assert [d.node for d in rc.top] == sorted(profile.nodes)[:5]

    def test_node_mismatch(self, profile) -> None:
        other = compute_profile(random_partitioned(seed=11, n=21, density=0.5, group_count=3), "wngf")
        with pytest.raises(StatsError, match="only in second: n020"):
            compare_profiles(profile, other)
