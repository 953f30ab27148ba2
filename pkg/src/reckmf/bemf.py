"""Bernoulli matrix factorization with a variance (recklessness) regularizer.

One latent plane per admissible score: user factors have shape (U, s, D) and
item factors (I, s, D). The probability of score k for a pair is the
logistic of that plane's inner product, normalized across planes. The
training objective is the Bernoulli negative log-likelihood minus
`recklessness` times the variance of each predicted distribution, plus an
optional L2 term; positive recklessness therefore rewards spiky, committed
predictions and negative values reward flat, cautious ones.

Two gradient modes are provided for the variance term. `exact` uses the true
derivative of the sigma-normalized softmax, which carries a (1 - sigma)
damping factor, and matches finite differences of the cost. `undamped`
drops that factor, i.e. it applies the exponential-softmax derivative
identity to the sigma-normalized softmax; this is the form the model family
is usually written with, so it stays the default.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import _kernels
from .data import RatingsMatrix, ScoreScale
from .distributions import Prediction, RatingDistribution, sigmoid, sigmoid_softmax
from .exceptions import DivergenceError
from .serialize import load_checkpoint, save_checkpoint
from .validation import (
    as_pair_array,
    check_at_least,
    check_choice,
    check_index_bounds,
    check_positive,
    ensure_ratings_matrix,
)

GRADIENT_MODES = ("undamped", "exact")


@dataclass
class TrainReport:
    """Per-epoch training cost and the run's wall time."""

    epoch_costs: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def final_cost(self) -> float:
        return self.epoch_costs[-1] if self.epoch_costs else float("nan")


def init_factors(num_users, num_items, n_scores, factors, init_stddev, rng):
    """Gaussian-initialized factor planes, deterministic for a given generator."""
    P = rng.normal(0.0, init_stddev, size=(num_users, n_scores, factors))
    Q = rng.normal(0.0, init_stddev, size=(num_items, n_scores, factors))
    return P, Q


def bemf_cost(P, Q, ratings: RatingsMatrix, recklessness: float = 0.0, l2: float = 0.0) -> float:
    """Full training objective over the observed entries.

    With recklessness = 0 and l2 = 0 this is exactly the Bernoulli negative
    log-likelihood of the observed ratings.
    """
    u, i, k0 = ratings.users, ratings.items, ratings.score_indices
    n = len(u)
    Pg = P[u]
    Qg = Q[i]
    # divergent parameters legitimately flow through here as inf/nan; callers
    # check finiteness of the result
    with np.errstate(all="ignore"):
        dots = np.einsum("nkd,nkd->nk", Pg, Qg)
        sig = sigmoid(dots)
        rows = np.arange(n)
        log_hit = np.log(sig[rows, k0])
        log_miss = np.log1p(-sig)
        total = -np.sum(log_hit) - (np.sum(log_miss) - np.sum(log_miss[rows, k0]))
        if recklessness != 0.0:
            sm = sig / sig.sum(axis=1, keepdims=True)
            x = ratings.scale.as_array()
            e1 = sm @ x
            e2 = sm @ (x * x)
            total -= recklessness * np.sum(e2 - e1 * e1)
        if l2 != 0.0:
            total += 0.5 * l2 * (np.einsum("nkd,nkd->", Pg, Pg) + np.einsum("nkd,nkd->", Qg, Qg))
    return float(total)


def bemf_cost_gradients(P, Q, ratings: RatingsMatrix, recklessness: float = 0.0,
                        l2: float = 0.0, gradient_mode: str = "exact"):
    """Analytic gradient of `bemf_cost` with respect to both factor tensors.

    In `exact` mode the result matches central finite differences of the
    cost; `undamped` mode omits the (1 - sigma) factor in the variance part and
    is only a descent heuristic.
    """
    check_choice("gradient_mode", gradient_mode, GRADIENT_MODES)
    u, i, k0 = ratings.users, ratings.items, ratings.score_indices
    n = len(u)
    Pg = P[u]
    Qg = Q[i]
    dots = np.einsum("nkd,nkd->nk", Pg, Qg)
    sig = sigmoid(dots)
    rows = np.arange(n)
    # d(likelihood)/d(dot): sigma off the rated plane, -(1 - sigma) on it
    dlike = sig.copy()
    dlike[rows, k0] = -(1.0 - sig[rows, k0])
    coef = dlike
    if recklessness != 0.0:
        sm = sig / sig.sum(axis=1, keepdims=True)
        x = ratings.scale.as_array()
        e1 = sm @ x
        e2 = sm @ (x * x)
        spread = (x[None, :] ** 2 - e2[:, None]) - 2.0 * e1[:, None] * (x[None, :] - e1[:, None])
        dvar = sm * spread
        if gradient_mode == "exact":
            dvar *= 1.0 - sig
        coef = coef - recklessness * dvar
    dP = np.zeros_like(P)
    dQ = np.zeros_like(Q)
    np.add.at(dP, u, coef[:, :, None] * Qg + l2 * Pg)
    np.add.at(dQ, i, coef[:, :, None] * Pg + l2 * Qg)
    return dP, dQ


def sgd_epoch(P, Q, ratings: RatingsMatrix, learning_rate: float,
              recklessness: float = 0.0, l2: float = 0.0,
              gradient_mode: str = "undamped", order=None, rng=None):
    """One stochastic pass over the observed entries, updating P and Q in place.

    Entries are visited in `order` (a shuffled permutation drawn from `rng`
    when not given). For each pair all score planes are updated from a
    snapshot of that pair's factors.
    """
    check_choice("gradient_mode", gradient_mode, GRADIENT_MODES)
    if order is None:
        rng = rng if rng is not None else np.random.default_rng()
        order = rng.permutation(ratings.n_ratings)
    order = np.asarray(order, dtype=np.int64)
    _kernels.bemf_epoch(
        P, Q, ratings.users, ratings.items, ratings.score_indices,
        ratings.scale.as_array(), order,
        float(learning_rate), float(recklessness), float(l2),
        gradient_mode == "exact",
    )
    return P, Q


class BemfRecommender(BaseEstimator):
    """Probabilistic recommender trained by per-rating SGD.

    Parameters
    ----------
    factors : latent dimension of every score plane.
    learning_rate : SGD step size.
    l2 : L2 shrinkage applied at every pair visit.
    recklessness : weight of the predicted-distribution variance in the
        objective; any sign is accepted.
    epochs : full passes over the training entries.
    init_stddev : std-dev of the Gaussian factor initialization.
    seed : seed for initialization and epoch shuffling.
    gradient_mode : "undamped" or "exact" (see module docstring).
    scale : ScoreScale, required only when fitting from raw arrays.
    """

    def __init__(self, factors=4, learning_rate=0.05, l2=0.0, recklessness=0.0,
                 epochs=50, init_stddev=0.1, seed=0, gradient_mode="undamped",
                 scale=None):
        self.factors = factors
        self.learning_rate = learning_rate
        self.l2 = l2
        self.recklessness = recklessness
        self.epochs = epochs
        self.init_stddev = init_stddev
        self.seed = seed
        self.gradient_mode = gradient_mode
        self.scale = scale

    def _validate_hyper(self):
        check_at_least("factors", self.factors, 1)
        check_positive("learning_rate", self.learning_rate)
        check_at_least("epochs", self.epochs, 1)
        check_positive("init_stddev", self.init_stddev)
        check_choice("gradient_mode", self.gradient_mode, GRADIENT_MODES)

    def fit(self, X, y=None):
        """Train on a RatingsMatrix (or on (user, item) pairs X with raw scores y)."""
        self._validate_hyper()
        ratings = ensure_ratings_matrix(X, y, self.scale)
        rng = np.random.default_rng(self.seed)
        P, Q = init_factors(ratings.num_users, ratings.num_items,
                            ratings.scale.size, self.factors, self.init_stddev, rng)
        report = TrainReport()
        started = time.perf_counter()
        for epoch in range(self.epochs):
            order = rng.permutation(ratings.n_ratings)
            sgd_epoch(P, Q, ratings, self.learning_rate, self.recklessness,
                      self.l2, self.gradient_mode, order=order)
            cost = bemf_cost(P, Q, ratings, self.recklessness, self.l2)
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

    def _pair_dots(self, pairs):
        return np.einsum("nkd,nkd->nk", self.user_factors_[pairs[:, 0]],
                         self.item_factors_[pairs[:, 1]])

    def predict_proba(self, X) -> np.ndarray:
        """Probability of each score for every (user, item) row of X; shape (n, s)."""
        pairs = as_pair_array(X)
        check_index_bounds(pairs, self.num_users_, self.num_items_)
        return sigmoid_softmax(self._pair_dots(pairs))

    def predict(self, X) -> np.ndarray:
        """Mode score per pair. Ties break toward the smaller score."""
        probs = self.predict_proba(X)
        return self.scale_.as_array()[probs.argmax(axis=1)]

    def predict_with_reliability(self, X):
        """(mode score, probability of the mode) per pair."""
        probs = self.predict_proba(X)
        k = probs.argmax(axis=1)
        return self.scale_.as_array()[k], probs[np.arange(len(k)), k]

    def predict_distribution(self, user: int, item: int) -> RatingDistribution:
        probs = self.predict_proba([[user, item]])[0]
        return RatingDistribution(self.scale_, probs)

    def predict_pair(self, user: int, item: int) -> Prediction:
        score, rel = self.predict_with_reliability([[user, item]])
        return Prediction(score=float(score[0]), reliability=float(rel[0]))

    def save(self, path) -> None:
        meta = {
            "params": {k: v for k, v in self.get_params().items() if k != "scale"},
            "scale_values": list(self.scale_.values),
            "num_users": self.num_users_,
            "num_items": self.num_items_,
        }
        save_checkpoint(path, "bemf", meta, {
            "user_factors": self.user_factors_,
            "item_factors": self.item_factors_,
        })

    @classmethod
    def load(cls, path) -> "BemfRecommender":
        kind, meta, arrays = load_checkpoint(path)
        if kind != "bemf":
            raise ValueError(f"checkpoint holds a {kind!r} model, not bemf")
        model = cls(**meta["params"])
        model.scale_ = ScoreScale(tuple(meta["scale_values"]))
        model.scale = model.scale_
        model.num_users_ = int(meta["num_users"])
        model.num_items_ = int(meta["num_items"])
        model.user_factors_ = arrays["user_factors"]
        model.item_factors_ = arrays["item_factors"]
        model.train_report_ = TrainReport()
        return model
