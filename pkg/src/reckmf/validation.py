"""Input validation helpers used by the estimators and the CLI."""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError, DataError


def check_positive(name: str, value) -> None:
    if not np.isfinite(value) or value <= 0:
        raise ConfigurationError(f"{name} must be positive, got {value!r}")


def check_at_least(name: str, value, minimum: int) -> None:
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value!r}")


def check_probability(name: str, value) -> None:
    if not (0.0 <= value <= 1.0):
        raise ConfigurationError(f"{name} must be in [0, 1], got {value!r}")


def check_choice(name: str, value, choices) -> None:
    if value not in choices:
        raise ConfigurationError(f"{name} must be one of {sorted(choices)}, got {value!r}")


def as_pair_array(X) -> np.ndarray:
    """Coerce X to an (n, 2) integer array of (user, item) indices."""
    pairs = np.asarray(X)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise DataError(f"expected an (n, 2) array of (user, item) pairs, got shape {pairs.shape}")
    if not np.issubdtype(pairs.dtype, np.integer):
        rounded = np.rint(pairs)
        if not np.array_equal(rounded, pairs):
            raise DataError("user/item indices must be integers")
        pairs = rounded.astype(np.int64)
    return pairs.astype(np.int64, copy=False)


def check_index_bounds(pairs: np.ndarray, num_users: int, num_items: int) -> None:
    if pairs.size == 0:
        return
    if pairs.min() < 0 or pairs[:, 0].max() >= num_users or pairs[:, 1].max() >= num_items:
        raise DataError(
            f"user/item index out of range for a model with {num_users} users and {num_items} items"
        )


def ensure_ratings_matrix(X, y=None, scale=None):
    """Accept a RatingsMatrix directly, or build one from (pairs, raw scores)."""
    from .data import RatingsMatrix

    if isinstance(X, RatingsMatrix):
        return X
    if y is None:
        raise ConfigurationError("fitting from arrays requires y (raw scores) alongside X pairs")
    if scale is None:
        raise ConfigurationError("fitting from arrays requires an explicit score scale")
    pairs = as_pair_array(X)
    scores = np.asarray(y, dtype=float)
    if scores.shape != (pairs.shape[0],):
        raise DataError(f"y must have shape ({pairs.shape[0]},), got {scores.shape}")
    num_users = int(pairs[:, 0].max()) + 1 if pairs.size else 0
    num_items = int(pairs[:, 1].max()) + 1 if pairs.size else 0
    kidx = np.array([scale.index_of(v) for v in scores], dtype=np.int64)
    return RatingsMatrix(num_users, num_items, scale, pairs[:, 0], pairs[:, 1], kidx)
