import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reckmf import (
    DataError,
    EvaluatedIndividual,
    ObjectivePoint,
    crowding_distance,
    dominates,
    hypervolume_2d,
    non_dominated_sort,
    pareto_front,
)


def brute_force_maxima(points):
    """Independent oracle: indices not dominated by any other point."""
    out = []
    for a, pa in enumerate(points):
        dominated = any(
            pb[0] >= pa[0] and pb[1] >= pa[1] and pb != pa
            for b, pb in enumerate(points) if b != a
        )
        if not dominated:
            out.append(a)
    return out


def monte_carlo_hypervolume(points, reference, n_samples, seed=0):
    """Independent oracle: fraction of uniform samples dominated by the front."""
    rng = np.random.default_rng(seed)
    pts = np.asarray(points, dtype=float)
    ref = np.asarray(reference, dtype=float)
    hi = pts.max(axis=0)
    box = np.prod(hi - ref)
    if box == 0:
        return 0.0
    samples = rng.uniform(ref, hi, size=(n_samples, 2))
    covered = np.zeros(n_samples, dtype=bool)
    for p in pts:
        covered |= (samples[:, 0] <= p[0]) & (samples[:, 1] <= p[1])
    return float(box * covered.mean())


class TestDominates:
    def test_strict(self):
        assert dominates((0.5, 0.5), (0.4, 0.4))

    def test_incomparable(self):
        assert not dominates((0.2, 0.9), (0.9, 0.2))
        assert not dominates((0.9, 0.2), (0.2, 0.9))

    def test_no_self_domination(self):
        assert not dominates((0.5, 0.5), (0.5, 0.5))

    def test_weak_improvement_counts(self):
        assert dominates((0.5, 0.5), (0.5, 0.4))

    def test_accepts_objective_points(self):
        assert dominates(ObjectivePoint(0.6, 0.6), ObjectivePoint(0.5, 0.5))


class TestNonDominatedSort:
    def test_worked_example(self):
        points = [(0.2, 0.9), (0.5, 0.5), (0.9, 0.2), (0.4, 0.4)]
        fronts = non_dominated_sort(points)
        assert sorted(fronts[0]) == [0, 1, 2]
        assert fronts[1] == [3]

    def test_identical_points_single_front(self):
        fronts = non_dominated_sort([(0.5, 0.5)] * 4)
        assert len(fronts) == 1 and sorted(fronts[0]) == [0, 1, 2, 3]

    def test_chain_gives_singletons(self):
        fronts = non_dominated_sort([(0.1, 0.1), (0.2, 0.2), (0.3, 0.3)])
        assert fronts == [[2], [1], [0]]

    def test_every_index_once(self):
        rng = np.random.default_rng(5)
        points = [tuple(p) for p in rng.random((40, 2))]
        fronts = non_dominated_sort(points)
        flat = sorted(i for front in fronts for i in front)
        assert flat == list(range(40))

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=50, deadline=None)
    def test_front_zero_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        points = [tuple(p) for p in rng.random((30, 2)).round(2)]
        assert sorted(non_dominated_sort(points)[0]) == brute_force_maxima(points)


class TestCrowdingDistance:
    def test_two_points_both_infinite(self):
        assert np.all(np.isinf(crowding_distance([(0.1, 0.9), (0.9, 0.1)])))

    def test_three_even_points_middle_is_two(self):
        d = crowding_distance([(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)])
        assert np.isinf(d[0]) and np.isinf(d[2])
        assert d[1] == 2.0

    def test_interior_duplicates_get_zero_gap(self):
        # all x equal: that objective contributes nothing to interior points
        d = crowding_distance([(0.5, 0.0), (0.5, 0.4), (0.5, 0.5), (0.5, 1.0)])
        assert d[1] == pytest.approx((0.5 - 0.0) / 1.0)
        assert d[2] == pytest.approx((1.0 - 0.4) / 1.0)


class TestParetoFront:
    def _ind(self, acc, cov):
        return EvaluatedIndividual(genome={"g": 0.0}, fitness=ObjectivePoint(acc, cov))

    def test_single_individual(self):
        ind = self._ind(0.5, 0.5)
        assert pareto_front([ind]) == [ind]

    def test_two_incomparable_sorted_by_coverage(self):
        a, b = self._ind(0.9, 0.2), self._ind(0.2, 0.9)
        front = pareto_front([b, a])
        assert front == [a, b]  # coverage ascending

    def test_dominated_excluded(self):
        a, b = self._ind(0.5, 0.5), self._ind(0.4, 0.4)
        assert pareto_front([a, b]) == [a]

    def test_empty_error(self):
        with pytest.raises(DataError):
            pareto_front([])


class TestHypervolume:
    def test_unit_square(self):
        assert hypervolume_2d([(1.0, 1.0)], (0.0, 0.0)) == 1.0

    def test_two_point_fixture(self):
        hv = hypervolume_2d([(0.5, 0.6), (0.7, 0.3)], (0.0, 0.0))
        assert hv == pytest.approx(0.36, abs=1e-12)

    def test_dominated_point_ignored(self):
        hv = hypervolume_2d([(0.5, 0.6), (0.7, 0.3), (0.4, 0.2)], (0.0, 0.0))
        assert hv == pytest.approx(0.36, abs=1e-12)

    def test_duplicate_points_ignored(self):
        hv = hypervolume_2d([(0.5, 0.6), (0.5, 0.6), (0.7, 0.3)], (0.0, 0.0))
        assert hv == pytest.approx(0.36, abs=1e-12)

    def test_below_reference_rejected(self):
        with pytest.raises(DataError):
            hypervolume_2d([(0.5, -0.1)], (0.0, 0.0))

    def test_nonzero_reference(self):
        hv = hypervolume_2d([(0.5, 0.6), (0.7, 0.3)], (0.4, 0.2))
        # sweep by hand: (0.7-0.4)*(0.3-0.2) + (0.5-0.4)*(0.6-0.3)
        assert hv == pytest.approx(0.3 * 0.1 + 0.1 * 0.3, abs=1e-12)

    def test_matches_monte_carlo(self):
        rng = np.random.default_rng(11)
        points = [tuple(p) for p in rng.uniform(0.05, 1.0, size=(12, 2))]
        exact = hypervolume_2d(points, (0.0, 0.0))
        approx = monte_carlo_hypervolume(points, (0.0, 0.0), n_samples=1_000_000, seed=1)
        assert exact == pytest.approx(approx, abs=1e-2)

    @given(st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=40, deadline=None)
    def test_adding_points_never_decreases(self, seed):
        rng = np.random.default_rng(seed)
        points = [tuple(p) for p in rng.random((8, 2))]
        base = hypervolume_2d(points[:4], (0.0, 0.0))
        more = hypervolume_2d(points, (0.0, 0.0))
        assert more >= base - 1e-15
