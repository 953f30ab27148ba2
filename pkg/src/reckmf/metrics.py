"""Reliability-thresholded evaluation: MAE/coverage curves and aggregates.

For a threshold theta, only predictions whose reliability is >= theta count.
MAE is normalized by the score range, so both objectives live in [0, 1].
The aggregate weights low thresholds more (weight proportional to N - k) and
the weights sum to exactly 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import RatingsMatrix, ScoreScale
from .exceptions import ConfigurationError, DataError


@dataclass(frozen=True)
class PredictionRecord:
    user: int
    item: int
    true_score: float
    predicted_score: float
    reliability: float


@dataclass(frozen=True)
class AggregateScore:
    one_minus_mae: float
    coverage: float

    def to_json(self) -> str:
        return json.dumps({"one_minus_mae": self.one_minus_mae, "coverage": self.coverage},
                          sort_keys=True)


class ThresholdCurve:
    """(theta, mae, coverage) rows over the equidistant threshold grid.

    `mae` entries are None where no prediction clears the threshold.
    """

    def __init__(self, thresholds, mae, coverage):
        self.thresholds = np.asarray(thresholds, dtype=float)
        self.mae = list(mae)
        self.coverage = np.asarray(coverage, dtype=float)
        n = self.n_points
        if not (len(self.mae) == self.coverage.size == n):
            raise ConfigurationError("curve columns must have equal length")
        expected = threshold_grid(n)
        if not np.allclose(self.thresholds, expected, atol=1e-12):
            raise ConfigurationError("thresholds must form the k/(N-1) grid")
        if np.any(np.diff(self.coverage) > 1e-12):
            raise ConfigurationError("coverage must be non-increasing in theta")
        for m, c in zip(self.mae, self.coverage):
            if (m is None) != (c == 0.0):
                raise ConfigurationError("mae must be absent exactly when coverage is 0")

    @property
    def n_points(self) -> int:
        return int(self.thresholds.size)

    def rows(self):
        yield from zip(self.thresholds, self.mae, self.coverage)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("theta,mae,coverage\n")
            for theta, mae, cov in self.rows():
                mae_text = "" if mae is None else repr(float(mae))
                fh.write(f"{repr(float(theta))},{mae_text},{repr(float(cov))}\n")

    @classmethod
    def from_csv(cls, path) -> "ThresholdCurve":
        thetas, maes, covs = [], [], []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "theta,mae,coverage":
                raise DataError(f"{path}: unexpected curve header {header!r}")
            for line in fh:
                theta, mae, cov = line.rstrip("\n").split(",")
                thetas.append(float(theta))
                maes.append(None if mae == "" else float(mae))
                covs.append(float(cov))
        return cls(thetas, maes, covs)


def threshold_grid(n: int) -> np.ndarray:
    """The N equidistant thresholds k/(N-1), k = 0..N-1."""
    if n < 2:
        raise ConfigurationError(f"threshold grid needs at least 2 points, got {n}")
    return np.arange(n) / (n - 1)


def predict_testset(model, test: RatingsMatrix) -> list:
    """One PredictionRecord per test rating, in (user, item) order."""
    if test.n_ratings == 0:
        return []
    pairs = test.pairs()
    scores, reliabilities = model.predict_with_reliability(pairs)
    truth = test.raw_scores()
    return [
        PredictionRecord(int(u), int(i), float(t), float(s), float(r))
        for (u, i), t, s, r in zip(pairs, truth, scores, reliabilities)
    ]


def thresholded_metrics(records, theta: float, scale: ScoreScale):
    """(normalized MAE over T^theta or None, share of records in T^theta)."""
    if not records:
        raise DataError("cannot compute thresholded metrics over zero records")
    truth = np.array([r.true_score for r in records])
    pred = np.array([r.predicted_score for r in records])
    rel = np.array([r.reliability for r in records])
    return _metrics_at(truth, pred, rel, theta, scale.width)


def _metrics_at(truth, pred, rel, theta, width):
    kept = rel >= theta
    coverage = kept.sum() / truth.size
    if not kept.any():
        return None, 0.0
    mae = float(np.mean(np.abs(truth[kept] - pred[kept]) / width))
    return mae, float(coverage)


def aggregate(curve: ThresholdCurve) -> AggregateScore:
    """Triangular-weighted averages of (1 - MAE) and coverage over the grid.

    Weight of row k is (N - k) / (N(N+1)/2). Rows with no surviving
    predictions contribute zero accuracy credit.
    """
    n = curve.n_points
    weights = np.arange(n, 0, -1, dtype=float)  # N, N-1, ..., 1
    denom = n * (n + 1) / 2
    gain = np.array([0.0 if m is None else 1.0 - m for m in curve.mae])
    one_minus_mae = float(np.dot(weights, gain) / denom)
    coverage = float(np.dot(weights, curve.coverage) / denom)
    return AggregateScore(one_minus_mae=one_minus_mae, coverage=coverage)


def aggregate_weights(n: int) -> np.ndarray:
    """The normalized row weights used by `aggregate`."""
    if n < 2:
        raise ConfigurationError(f"need at least 2 rows, got {n}")
    weights = np.arange(n, 0, -1, dtype=float)
    return weights / (n * (n + 1) / 2)


def evaluate(model, test: RatingsMatrix, n_thresholds: int = 20):
    """Threshold curve and aggregate score of a fitted model on a test set."""
    if test.n_ratings == 0:
        raise DataError("cannot evaluate on an empty test set")
    pairs = test.pairs()
    pred, rel = model.predict_with_reliability(pairs)
    truth = test.raw_scores()
    thetas = threshold_grid(n_thresholds)
    maes, covs = [], []
    for theta in thetas:
        mae, cov = _metrics_at(truth, pred, rel, theta, test.scale.width)
        maes.append(mae)
        covs.append(cov)
    curve = ThresholdCurve(thetas, maes, covs)
    return curve, aggregate(curve)
