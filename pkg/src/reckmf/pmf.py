"""Real-valued matrix factorization baseline (squared-error SGD).

A plain regressor: predictions are inner products clamped to the score
range, and every prediction carries reliability 1.0, so threshold-filtered
coverage is always 100%.
"""

from __future__ import annotations

import itertools
import time

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from .bemf import TrainReport
from .data import RatingsMatrix, ScoreScale
from .distributions import Prediction
from .exceptions import DivergenceError
from .serialize import load_checkpoint, save_checkpoint
from .validation import (
    as_pair_array,
    check_at_least,
    check_index_bounds,
    check_positive,
    ensure_ratings_matrix,
)


def pmf_cost(P, Q, ratings: RatingsMatrix, l2: float = 0.0) -> float:
    """Sum of squared errors plus per-entry L2 on the touched factor rows."""
    u, i = ratings.users, ratings.items
    with np.errstate(all="ignore"):  # divergent params flow through as inf/nan
        err = ratings.raw_scores() - np.einsum("nd,nd->n", P[u], Q[i])
        total = float(np.sum(err * err))
        if l2 != 0.0:
            total += l2 * float(np.einsum("nd,nd->", P[u], P[u]) + np.einsum("nd,nd->", Q[i], Q[i]))
    return total


def pmf_cost_gradients(P, Q, ratings: RatingsMatrix, l2: float = 0.0):
    u, i = ratings.users, ratings.items
    Pg, Qg = P[u], Q[i]
    err = ratings.raw_scores() - np.einsum("nd,nd->n", Pg, Qg)
    dP = np.zeros_like(P)
    dQ = np.zeros_like(Q)
    np.add.at(dP, u, -2.0 * err[:, None] * Qg + 2.0 * l2 * Pg)
    np.add.at(dQ, i, -2.0 * err[:, None] * Pg + 2.0 * l2 * Qg)
    return dP, dQ


class PmfRecommender(BaseEstimator):
    """Latent-factor regression recommender; reliability is identically 1."""

    def __init__(self, factors=4, learning_rate=0.01, l2=0.05, epochs=50,
                 init_stddev=0.1, seed=0, scale=None):
        self.factors = factors
        self.learning_rate = learning_rate
        self.l2 = l2
        self.epochs = epochs
        self.init_stddev = init_stddev
        self.seed = seed
        self.scale = scale

    def fit(self, X, y=None):
        check_at_least("factors", self.factors, 1)
        check_positive("learning_rate", self.learning_rate)
        check_at_least("epochs", self.epochs, 1)
        check_positive("init_stddev", self.init_stddev)
        ratings = ensure_ratings_matrix(X, y, self.scale)
        rng = np.random.default_rng(self.seed)
        P = rng.normal(0.0, self.init_stddev, size=(ratings.num_users, self.factors))
        Q = rng.normal(0.0, self.init_stddev, size=(ratings.num_items, self.factors))
        raw = np.ascontiguousarray(ratings.raw_scores())
        report = TrainReport()
        started = time.perf_counter()
        for epoch in range(self.epochs):
            order = rng.permutation(ratings.n_ratings)
            _kernels.pmf_epoch(P, Q, ratings.users, ratings.items, raw, order,
                               float(self.learning_rate), float(self.l2))
            cost = pmf_cost(P, Q, ratings, self.l2)
            if not np.isfinite(cost):
                raise DivergenceError(f"non-finite training cost at epoch {epoch}")
            report.epoch_costs.append(cost)
        report.wall_time = time.perf_counter() - started
        self.user_factors_ = P
        self.item_factors_ = Q
        self.scale_ = ratings.scale
        self.num_users_ = ratings.num_users
        self.num_items_ = ratings.num_items
        self.train_report_ = report
        return self

    def predict(self, X) -> np.ndarray:
        """Inner products clamped to the score range."""
        pairs = as_pair_array(X)
        check_index_bounds(pairs, self.num_users_, self.num_items_)
        dots = np.einsum("nd,nd->n", self.user_factors_[pairs[:, 0]],
                         self.item_factors_[pairs[:, 1]])
        return np.clip(dots, self.scale_.min, self.scale_.max)

    def predict_with_reliability(self, X):
        scores = self.predict(X)
        return scores, np.ones_like(scores)

    def predict_pair(self, user: int, item: int) -> Prediction:
        score = self.predict([[user, item]])[0]
        return Prediction(score=float(score), reliability=1.0)

    def save(self, path) -> None:
        meta = {
            "params": {k: v for k, v in self.get_params().items() if k != "scale"},
            "scale_values": list(self.scale_.values),
            "num_users": self.num_users_,
            "num_items": self.num_items_,
        }
        save_checkpoint(path, "pmf", meta, {
            "user_factors": self.user_factors_,
            "item_factors": self.item_factors_,
        })

    @classmethod
    def load(cls, path) -> "PmfRecommender":
        kind, meta, arrays = load_checkpoint(path)
        if kind != "pmf":
            raise ValueError(f"checkpoint holds a {kind!r} model, not pmf")
        model = cls(**meta["params"])
        model.scale_ = ScoreScale(tuple(meta["scale_values"]))
        model.scale = model.scale_
        model.num_users_ = int(meta["num_users"])
        model.num_items_ = int(meta["num_items"])
        model.user_factors_ = arrays["user_factors"]
        model.item_factors_ = arrays["item_factors"]
        model.train_report_ = TrainReport()
        return model


def grid_search(train: RatingsMatrix, grid: dict, folds, n_thresholds: int,
                seed: int) -> dict:
    """Pick PMF hyperparameters by k-fold CV, maximizing aggregate 1 - MAE.

    `grid` maps parameter names to candidate lists; every combination is
    scored with the same folds.
    """
    from .metrics import evaluate

    names = sorted(grid)
    best_params, best_score = None, -np.inf
    for combo in itertools.product(*(grid[n] for n in names)):
        params = dict(zip(names, combo))
        scores = []
        for f in range(folds.n_folds):
            held = folds.heldout_mask(f)
            model = PmfRecommender(seed=seed, **params)
            try:
                model.fit(train.subset(~held))
            except DivergenceError:
                scores = None
                break
            _, agg = evaluate(model, train.subset(held), n_thresholds)
            scores.append(agg.one_minus_mae)
        if scores is None:
            continue
        mean = float(np.mean(scores))
        if mean > best_score:
            best_params, best_score = params, mean
    if best_params is None:
        raise DivergenceError("every grid combination diverged")
    return best_params
