"""Deterministic synthetic rating data with low-rank structure.

Useful for demos and for benchmark-shaped fixtures when the public datasets
are not on disk. Scores come from a noisy low-rank model snapped to the
scale, so factorization models have real signal to learn.
"""

from __future__ import annotations

import numpy as np

from .data import RatingsMatrix, ScoreScale


def synthetic_ratings(num_users: int, num_items: int, num_ratings: int,
                      scale: ScoreScale, seed: int, rank: int = 4,
                      noise: float = 0.6) -> RatingsMatrix:
    """Generate exactly `num_ratings` ratings covering every user and item.

    Each (user, item) pair appears at most once. The underlying score is an
    affine map of a rank-`rank` inner product plus Gaussian noise, rounded to
    the nearest scale value.
    """
    if num_ratings < max(num_users, num_items):
        raise ValueError("num_ratings must cover every user and item at least once")
    if num_ratings > num_users * num_items:
        raise ValueError("num_ratings exceeds the number of distinct pairs")
    rng = np.random.default_rng(seed)

    # coverage pass: one rating per user, then one per still-unseen item
    users = list(range(num_users))
    items = list(rng.integers(0, num_items, size=num_users))
    seen_items = set(items)
    missing = [i for i in range(num_items) if i not in seen_items]
    users.extend(rng.integers(0, num_users, size=len(missing)))
    items.extend(missing)

    taken = set(zip(users, items))
    # fill the remainder with fresh random pairs
    while len(taken) < num_ratings:
        batch = num_ratings - len(taken)
        uu = rng.integers(0, num_users, size=batch + batch // 2 + 8)
        ii = rng.integers(0, num_items, size=uu.size)
        for u, i in zip(uu, ii):
            key = (int(u), int(i))
            if key not in taken:
                taken.add(key)
                users.append(int(u))
                items.append(int(i))
                if len(taken) == num_ratings:
                    break
    users = np.array(users[:num_ratings], dtype=np.int64)
    items = np.array(items[:num_ratings], dtype=np.int64)

    pu = rng.normal(0.0, 1.0, size=(num_users, rank)) / np.sqrt(rank)
    qi = rng.normal(0.0, 1.0, size=(num_items, rank)) / np.sqrt(rank)
    signal = np.einsum("nd,nd->n", pu[users], qi[items])
    signal = signal + noise * rng.normal(size=signal.size)
    # map to the scale's span, then snap to the nearest admissible value
    mid = 0.5 * (scale.min + scale.max)
    half = 0.5 * scale.width
    raw = mid + half * np.tanh(signal)
    xvals = scale.as_array()
    kidx = np.abs(raw[:, None] - xvals[None, :]).argmin(axis=1)

    labels_u = [str(u + 1) for u in range(num_users)]
    labels_i = [str(i + 1) for i in range(num_items)]
    return RatingsMatrix(num_users, num_items, scale, users, items, kidx,
                         user_labels=labels_u, item_labels=labels_i)


def filmtrust_like(seed: int = 1508) -> RatingsMatrix:
    """A replica sized like the public FilmTrust dump (half-star 0.5..4.0 scale)."""
    scale = ScoreScale.from_range(0.5, 4.0, 0.5)
    return synthetic_ratings(1508, 2071, 35494, scale, seed=seed)


def movielens100k_like(seed: int = 943) -> RatingsMatrix:
    """A replica sized like MovieLens-100K (1..5 stars)."""
    scale = ScoreScale(tuple(range(1, 6)))
    return synthetic_ratings(943, 1682, 100000, scale, seed=seed)


def write_delimited(m: RatingsMatrix, path, delimiter: str = "\t",
                    with_timestamp: bool = False) -> None:
    """Write raw-format rating lines (user, item, score[, timestamp])."""
    xvals = m.scale.as_array()
    users = m.user_labels or [str(u) for u in range(m.num_users)]
    items = m.item_labels or [str(i) for i in range(m.num_items)]
    with open(path, "w", encoding="utf-8") as fh:
        for n, (u, i, k) in enumerate(zip(m.users, m.items, m.score_indices)):
            score = xvals[k]
            text = str(int(score)) if float(score).is_integer() else repr(float(score))
            row = [users[u], items[i], text]
            if with_timestamp:
                row.append(str(880000000 + 7 * n))
            fh.write(delimiter.join(row) + "\n")
