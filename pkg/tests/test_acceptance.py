"""Acceptance gate: one test per criterion, each printing a pass line.

Run with `pytest tests/test_acceptance.py -v` for the per-criterion report.
The two benchmark-shaped datasets are loaded from $RECKMF_DATA_DIR when that
directory holds the real dumps (filmtrust/ratings.txt space-delimited,
ml-100k/u.data tab-delimited); otherwise deterministic synthetic replicas
with the same user/item/rating cardinalities and score scales are used.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

import reckmf as rk
from reckmf.cli import main as cli_main
from reckmf.distributions import batch_mean_and_variance
from reckmf.synthetic import filmtrust_like, movielens100k_like

from test_bemf import finite_difference_gradients, max_relative_error
from test_cli import make_workspace
from test_pareto import brute_force_maxima, monte_carlo_hypervolume
from conftest import random_ratings


def _report(num, name, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {num:02d} {name}: PASS{suffix}")


def _load_benchmark(name):
    """Real dataset when mounted, synthetic replica otherwise."""
    root = os.environ.get("RECKMF_DATA_DIR")
    if root:
        root = Path(root)
        if name == "filmtrust":
            path = root / "filmtrust" / "ratings.txt"
            if path.exists():
                scale = rk.ScoreScale.from_range(0.5, 4.0, 0.5)
                return rk.load_delimited(path, " ", ("user", "item", "score"), scale), "real"
        if name == "ml100k":
            path = root / "ml-100k" / "u.data"
            if path.exists():
                scale = rk.ScoreScale((1, 2, 3, 4, 5))
                return rk.load_delimited(path, "\t", ("user", "item", "score"), scale), "real"
    if name == "filmtrust":
        return filmtrust_like(), "synthetic replica"
    return movielens100k_like(), "synthetic replica"


@pytest.fixture(scope="module")
def filmtrust_split():
    matrix, source = _load_benchmark("filmtrust")
    split = rk.random_split(matrix, 2819 / 35494, seed=7)
    return split, source


class TestCriterion01GradientCorrectness:
    def test_exact_gradients_match_finite_differences(self):
        started = time.perf_counter()
        rng = np.random.default_rng(2024)
        worst = 0.0
        for trial in range(50):
            s = int(rng.choice([2, 3, 5]))
            alpha = float(rng.choice([-0.3, 0.0, 0.7]))
            beta = float(rng.choice([0.0, 0.05]))
            num_users = int(rng.integers(2, 6))
            num_items = int(rng.integers(2, 6))
            factors = int(rng.integers(1, 4))
            scale = rk.ScoreScale(tuple(range(1, s + 1)))
            n = int(rng.integers(3, num_users * num_items + 1))
            m = random_ratings(num_users, num_items, n, scale, seed=trial)
            P = rng.normal(0, 0.4, (num_users, s, factors))
            Q = rng.normal(0, 0.4, (num_items, s, factors))
            dP, dQ = rk.bemf_cost_gradients(P, Q, m, alpha, beta, gradient_mode="exact")
            fP, fQ = finite_difference_gradients(P, Q, m, alpha, beta, h=1e-5)
            worst = max(worst, max_relative_error(dP, fP), max_relative_error(dQ, fQ))
        elapsed = time.perf_counter() - started
        assert worst <= 1e-4
        assert elapsed < 10.0
        _report(1, "gradient correctness (exact mode)",
                f"max rel err {worst:.2e}, {elapsed:.1f}s")


class TestCriterion02ProbabilityNormalization:
    def test_100k_draws_sum_to_one(self):
        started = time.perf_counter()
        rng = np.random.default_rng(7)
        model = rk.BemfRecommender()
        model.user_factors_ = rng.normal(0, 1.2, (317, 5, 3))
        model.item_factors_ = rng.normal(0, 1.2, (317, 5, 3))
        model.scale_ = rk.ScoreScale((1, 2, 3, 4, 5))
        model.num_users_ = model.num_items_ = 317
        uu, ii = np.meshgrid(np.arange(317), np.arange(317))
        pairs = np.column_stack([uu.ravel(), ii.ravel()])  # 100,489 draws
        probs = model.predict_proba(pairs)
        # the object path goes through RatingDistribution validation as well
        for u, i in pairs[:: len(pairs) // 50]:
            d = model.predict_distribution(int(u), int(i))
            assert abs(d.probs.sum() - 1.0) < 1e-12
        elapsed = time.perf_counter() - started
        assert pairs.shape[0] >= 100_000
        assert np.max(np.abs(probs.sum(axis=1) - 1.0)) < 1e-12
        assert np.all(probs >= 0.0)
        assert elapsed < 5.0
        _report(2, "probability normalization", f"{pairs.shape[0]} draws, {elapsed:.1f}s")


class TestCriterion03MetricFixtures:
    def test_hand_computed_fixture(self):
        scale = rk.ScoreScale((1, 2, 3, 4, 5))
        records = [
            rk.PredictionRecord(0, 0, 4.0, 4.0, 0.9),
            rk.PredictionRecord(0, 1, 2.0, 5.0, 0.5),
            rk.PredictionRecord(1, 0, 3.0, 3.0, 0.7),
        ]
        assert rk.thresholded_metrics(records, 0.0, scale) == (0.25, 1.0)
        mae, cov = rk.thresholded_metrics(records, 0.6, scale)
        assert mae == 0.0 and cov == 2 / 3
        assert rk.thresholded_metrics(records, 0.95, scale) == (None, 0.0)
        curve = rk.ThresholdCurve([0.0, 1.0], [0.25, None], [1.0, 0.0])
        agg = rk.aggregate(curve)
        assert agg.one_minus_mae == 0.5
        assert agg.coverage == 2 / 3
        _report(3, "metric fixtures")


class TestCriterion04WeightNormalization:
    def test_weights_and_constant_curves(self):
        for n in range(2, 101):
            assert abs(rk.aggregate_weights(n).sum() - 1.0) < 1e-12
            curve = rk.ThresholdCurve(rk.threshold_grid(n), [0.25] * n, [0.5] * n)
            agg = rk.aggregate(curve)
            assert agg.one_minus_mae == pytest.approx(0.75, abs=1e-12)
            assert agg.coverage == pytest.approx(0.5, abs=1e-12)
        _report(4, "aggregate weight normalization", "N = 2..100")


class TestCriterion05ThresholdGrid:
    def test_n5_grid(self):
        assert rk.threshold_grid(5).tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        _report(5, "threshold grid N=5")


class TestCriterion06MultiObjectiveOracles:
    def test_sort_and_hypervolume_oracles(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            points = [tuple(p) for p in rng.random((50, 2)).round(3)]
            assert sorted(rk.non_dominated_sort(points)[0]) == brute_force_maxima(points)
        fixture_hv = rk.hypervolume_2d([(0.5, 0.6), (0.7, 0.3)], (0.0, 0.0))
        assert fixture_hv == pytest.approx(0.36, abs=1e-12)
        points = [tuple(p) for p in rng.uniform(0.05, 1.0, (15, 2))]
        exact = rk.hypervolume_2d(points, (0.0, 0.0))
        mc = monte_carlo_hypervolume(points, (0.0, 0.0), n_samples=1_000_000, seed=3)
        assert abs(exact - mc) < 1e-2
        _report(6, "multi-objective oracles",
                f"sweep {exact:.4f} vs MC {mc:.4f}, fixture {fixture_hv:.6f}")


class TestCriterion07RecklessnessSteering:
    def test_variance_and_coverage_monotone(self, filmtrust_split):
        split, source = filmtrust_split
        started = time.perf_counter()
        pairs = split.test.pairs()
        xvals = split.test.scale.as_array()
        variances, coverages = [], []
        for alpha in (-0.5, 0.0, 0.5):
            model = rk.BemfRecommender(factors=4, learning_rate=0.02, epochs=50,
                                       recklessness=alpha, seed=3).fit(split.train)
            probs = model.predict_proba(pairs)
            _, var = batch_mean_and_variance(probs, xvals)
            variances.append(float(var.mean()))
            _, rel = model.predict_with_reliability(pairs)
            coverages.append(float(np.mean(rel >= 0.8)))
        elapsed = time.perf_counter() - started
        assert variances[0] < variances[1] < variances[2]
        assert coverages[0] <= coverages[1] <= coverages[2]
        assert elapsed < 300.0
        _report(7, "recklessness steering",
                f"{source}; variances {['%.3f' % v for v in variances]}, "
                f"coverage@0.8 {coverages}, {elapsed:.0f}s")


class TestCriterion08ParetoWidening:
    def test_free_recklessness_front_not_worse(self, filmtrust_split):
        split, source = filmtrust_split
        started = time.perf_counter()
        desk_ranges = dict(factors=(2, 4), learning_rate=(0.01, 0.15),
                           l2=(0.0, 0.05), epochs=(10, 30))
        successes = 0
        details = []
        for seed in (11, 22, 33):
            folds = rk.kfold(split.train, 2, seed=seed)
            hv = {}
            for pinned in (False, True):
                space = rk.bemf_genome_space(recklessness=(-1.5, 1.5),
                                             pin_recklessness=pinned, **desk_ranges)
                config = rk.GaConfig(population_size=16, generations=10, seed=seed,
                                     cv_folds=2)

                def fitness(genome):
                    return rk.cv_fitness(genome, split.train, folds,
                                         n_thresholds=20, base_seed=seed)

                final = rk.nsga2_run(config, space, fitness)
                front = rk.pareto_front(final)
                per_theta = rk.front_test_points(front, split.train, split.test,
                                                 [0.0], base_seed=seed)
                hv[pinned] = rk.hypervolume_2d(per_theta[0.0], (0.0, 0.0))
            if hv[False] >= hv[True] - 0.005:
                successes += 1
            details.append(f"seed {seed}: free {hv[False]:.4f} vs pinned {hv[True]:.4f}")
        elapsed = time.perf_counter() - started
        assert successes >= 2, details
        assert elapsed < 3600.0
        _report(8, "pareto widening",
                f"{source}; {successes}/3 seeds, {'; '.join(details)}, {elapsed:.0f}s")


class TestCriterion09BaselineContract:
    def test_pmf_full_coverage_and_range(self):
        scale = rk.ScoreScale.from_range(0.5, 4.0, 0.5)
        m = random_ratings(40, 40, 500, scale, seed=12)
        split = rk.random_split(m, 0.2, seed=1)
        model = rk.PmfRecommender(factors=3, learning_rate=0.02, epochs=40,
                                  seed=0).fit(split.train)
        curve, agg = rk.evaluate(model, split.test, 20)
        assert agg.coverage == 1.0
        assert np.all(curve.coverage == 1.0)
        preds = model.predict(split.test.pairs())
        assert np.all(preds >= scale.min) and np.all(preds <= scale.max)
        _report(9, "baseline contract", f"coverage aggregate {agg.coverage}")


class TestCriterion10DatasetStats:
    def test_benchmark_cardinalities(self):
        ft, ft_source = _load_benchmark("filmtrust")
        assert (ft.num_users, ft.num_items) == (1508, 2071)
        ml, ml_source = _load_benchmark("ml100k")
        assert (ml.num_users, ml.num_items) == (943, 1682)
        assert ml.n_ratings == 100_000
        split = rk.random_split(ml, 7974 / 100000, seed=0)
        assert split.train.n_ratings == 92_026
        assert split.test.n_ratings == 7_974
        _report(10, "dataset stats",
                f"filmtrust {ft_source}, ml100k {ml_source}")


class TestCriterion11Determinism:
    def test_train_and_tune_reruns_byte_identical(self, tmp_path):
        runner = CliRunner()
        cfg = make_workspace(tmp_path)
        assert runner.invoke(cli_main, ["ingest", "--config", str(cfg)]).exit_code == 0
        out = tmp_path / "out"

        assert runner.invoke(cli_main, ["train", "--config", str(cfg)]).exit_code == 0
        first_ckpt = (out / "checkpoint_bemf.npz").read_bytes()
        assert runner.invoke(cli_main, ["train", "--config", str(cfg)]).exit_code == 0
        assert (out / "checkpoint_bemf.npz").read_bytes() == first_ckpt

        assert runner.invoke(cli_main, ["tune", "--config", str(cfg)]).exit_code == 0
        first_ledger = (out / "tune_ledger.jsonl").read_bytes()
        first_front = (out / "front.csv").read_bytes()
        assert runner.invoke(cli_main, ["tune", "--config", str(cfg)]).exit_code == 0
        assert (out / "tune_ledger.jsonl").read_bytes() == first_ledger
        assert (out / "front.csv").read_bytes() == first_front
        _report(11, "checkpoint and ledger determinism")
