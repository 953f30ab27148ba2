"""Probability primitives over a finite score scale.

Predictions are discrete distributions over the admissible scores. The
normalization used here divides per-score logistic activations by their sum,
which (unlike the exponential softmax) is *not* shift invariant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SUM_TOL = 1e-9


def sigmoid(x):
    """Numerically stable logistic function; works on scalars and arrays."""
    arr = np.asarray(x, dtype=float)
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


def sigmoid_softmax(dots: np.ndarray) -> np.ndarray:
    """Normalize logistic activations to a probability vector.

    Accepts a 1-d vector or a 2-d batch (one row per prediction). The
    denominator is always positive because the logistic function is.
    """
    sig = sigmoid(np.asarray(dots, dtype=float))
    sig = np.atleast_1d(np.asarray(sig))
    if sig.ndim == 1:
        return sig / sig.sum()
    return sig / sig.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class RatingDistribution:
    """Predicted probability for each score on the scale."""

    scale: "ScoreScale"
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.scale.size,):
            raise ValueError(f"expected {self.scale.size} probabilities, got shape {probs.shape}")
        if np.any(probs < -_SUM_TOL) or np.any(probs > 1.0 + _SUM_TOL):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, expected 1")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class Prediction:
    """A point prediction together with the probability of its mode."""

    score: float
    reliability: float


def softmax_of_sigmoid(dots, scale) -> RatingDistribution:
    return RatingDistribution(scale, sigmoid_softmax(np.asarray(dots, dtype=float)))


def mode_and_reliability(d: RatingDistribution) -> Prediction:
    """Mode of the distribution and its probability. Ties go to the smallest score."""
    k = int(np.argmax(d.probs))
    return Prediction(score=d.scale.values[k], reliability=float(d.probs[k]))


def expectation(d: RatingDistribution) -> float:
    return float(np.dot(d.scale.as_array(), d.probs))


def variance(d: RatingDistribution) -> float:
    x = d.scale.as_array()
    e1 = np.dot(x, d.probs)
    e2 = np.dot(x * x, d.probs)
    return float(e2 - e1 * e1)


def batch_mean_and_variance(probs: np.ndarray, score_values: np.ndarray):
    """Row-wise expectation and variance for a (n, s) matrix of distributions."""
    e1 = probs @ score_values
    e2 = probs @ (score_values * score_values)
    return e1, e2 - e1 * e1
