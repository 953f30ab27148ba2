"""Rating data: score scales, sparse rating matrices, splits and folds.

Raw user/item identifiers are remapped to dense 0-based indices in first
appearance order; the original labels are kept so exports round-trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import (
    ConfigurationError,
    DataError,
    DuplicateRatingError,
    ParseError,
    ScoreNotInScaleError,
)

SCORE_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class ScoreScale:
    """The finite, strictly increasing set of admissible rating values."""

    values: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise ConfigurationError("a score scale needs at least two values")
        if any(b - a <= 0 for a, b in zip(vals, vals[1:])):
            raise ConfigurationError("score scale values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_range(cls, low: float, high: float, step: float) -> "ScoreScale":
        if step <= 0:
            raise ConfigurationError("scale step must be positive")
        n = int(round((high - low) / step)) + 1
        return cls(tuple(low + k * step for k in range(n)))

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def min(self) -> float:
        return self.values[0]

    @property
    def max(self) -> float:
        return self.values[-1]

    @property
    def width(self) -> float:
        return self.values[-1] - self.values[0]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def index_of(self, raw: float) -> int:
        """Index of the scale value matching `raw` within a small tolerance."""
        for k, v in enumerate(self.values):
            if abs(raw - v) <= SCORE_MATCH_TOL:
                return k
        raise ScoreNotInScaleError(raw)

    def contains(self, raw: float) -> bool:
        try:
            self.index_of(raw)
            return True
        except ScoreNotInScaleError:
            return False


class RatingsMatrix:
    """Sparse user x item ratings with scores stored as scale indices.

    Entries are kept sorted by (user, item) and are immutable after
    construction, so a loaded matrix can be shared freely between training
    jobs running concurrently.
    """

    def __init__(self, num_users, num_items, scale, users, items, score_indices,
                 user_labels=None, item_labels=None):
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        kidx = np.asarray(score_indices, dtype=np.int64)
        if not (users.shape == items.shape == kidx.shape) or users.ndim != 1:
            raise DataError("users, items and score_indices must be equal-length 1-d arrays")
        if users.size:
            if users.min() < 0 or users.max() >= num_users:
                raise DataError("user index out of range")
            if items.min() < 0 or items.max() >= num_items:
                raise DataError("item index out of range")
            if kidx.min() < 0 or kidx.max() >= scale.size:
                raise DataError("score index out of range for the scale")
        order = np.lexsort((items, users))
        users, items, kidx = users[order], items[order], kidx[order]
        if users.size > 1:
            same = (np.diff(users) == 0) & (np.diff(items) == 0)
            if same.any():
                j = int(np.argmax(same))
                raise DuplicateRatingError(
                    f"duplicate rating for user {users[j]}, item {items[j]}"
                )
        for arr in (users, items, kidx):
            arr.flags.writeable = False
        self.num_users = int(num_users)
        self.num_items = int(num_items)
        self.scale = scale
        self.users = users
        self.items = items
        self.score_indices = kidx
        self.user_labels = list(user_labels) if user_labels is not None else None
        self.item_labels = list(item_labels) if item_labels is not None else None

    @property
    def n_ratings(self) -> int:
        return int(self.users.size)

    def raw_scores(self) -> np.ndarray:
        return self.scale.as_array()[self.score_indices]

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.users, self.items])

    def triples(self):
        """Iterate (user, item, score_index) in canonical order."""
        for u, i, k in zip(self.users, self.items, self.score_indices):
            yield int(u), int(i), int(k)

    def subset(self, mask: np.ndarray) -> "RatingsMatrix":
        """New matrix with the selected entries; dimensions and labels are kept."""
        mask = np.asarray(mask, dtype=bool)
        return RatingsMatrix(
            self.num_users, self.num_items, self.scale,
            self.users[mask], self.items[mask], self.score_indices[mask],
            self.user_labels, self.item_labels,
        )

    def to_canonical_csv(self, path) -> None:
        """Write the canonical "user,item,score" form with a header line."""
        user_of = self.user_labels if self.user_labels is not None else None
        item_of = self.item_labels if self.item_labels is not None else None
        xvals = self.scale.as_array()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("user,item,score\n")
            for u, i, k in zip(self.users, self.items, self.score_indices):
                uu = user_of[u] if user_of else str(u)
                ii = item_of[i] if item_of else str(i)
                fh.write(f"{uu},{ii},{_format_score(xvals[k])}\n")


def _format_score(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class DataSplit:
    train: RatingsMatrix
    test: RatingsMatrix


@dataclass(frozen=True)
class FoldAssignment:
    """Maps every training entry (in canonical order) to a fold id."""

    fold_of: np.ndarray
    n_folds: int

    def __post_init__(self):
        fold_of = np.asarray(self.fold_of, dtype=np.int64)
        if fold_of.size and (fold_of.min() < 0 or fold_of.max() >= self.n_folds):
            raise ConfigurationError("fold ids out of range")
        fold_of = fold_of.copy()
        fold_of.flags.writeable = False
        object.__setattr__(self, "fold_of", fold_of)

    def heldout_mask(self, fold: int) -> np.ndarray:
        return self.fold_of == fold


def _check_columns(column_order) -> dict:
    cols = tuple(column_order)
    if sorted(cols) != ["item", "score", "user"]:
        raise ConfigurationError(
            f"column_order must be a permutation of (user, item, score), got {cols!r}"
        )
    return {name: idx for idx, name in enumerate(cols)}


def _parse_into(path, delimiter, pos, scale, has_header, user_index, item_index,
                seen, users, items, kidx):
    path = Path(path)
    if not path.exists():
        raise DataError(f"rating file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if has_header and line_no == 1:
                continue
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            parts = line.split(delimiter)
            if len(parts) < 3:
                raise ParseError(path, line_no, f"expected at least 3 fields, got {len(parts)}")
            raw_user = parts[pos["user"]].strip()
            raw_item = parts[pos["item"]].strip()
            raw_score = parts[pos["score"]].strip()
            try:
                score_value = float(raw_score)
            except ValueError:
                raise ParseError(path, line_no, f"non-numeric score field {raw_score!r}") from None
            k = scale.index_of(score_value)
            u = user_index.setdefault(raw_user, len(user_index))
            i = item_index.setdefault(raw_item, len(item_index))
            if (u, i) in seen:
                raise DuplicateRatingError(
                    f"{path}:{line_no}: duplicate rating for user {raw_user!r}, item {raw_item!r}"
                )
            seen.add((u, i))
            users.append(u)
            items.append(i)
            kidx.append(k)


def load_delimited(path, delimiter: str, column_order, scale: ScoreScale,
                   has_header: bool = False) -> RatingsMatrix:
    """Parse a delimited rating file into a RatingsMatrix.

    `column_order` names what the first three fields hold, e.g.
    ("user", "item", "score"); any further fields (timestamps and the like)
    are ignored. Raw ids are remapped to dense indices in first-appearance
    order and retained as labels.
    """
    pos = _check_columns(column_order)
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    users, items, kidx = [], [], []
    _parse_into(path, delimiter, pos, scale, has_header, user_index, item_index,
                set(), users, items, kidx)
    return RatingsMatrix(
        len(user_index), len(item_index), scale,
        np.array(users, dtype=np.int64), np.array(items, dtype=np.int64),
        np.array(kidx, dtype=np.int64),
        user_labels=list(user_index), item_labels=list(item_index),
    )


def load_delimited_pair(train_path, test_path, delimiter: str, column_order,
                        scale: ScoreScale, has_header: bool = False) -> DataSplit:
    """Parse pre-split train/test files sharing one user/item index mapping.

    A (user, item) pair occurring in both files is a duplicate error.
    """
    pos = _check_columns(column_order)
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    seen = set()
    parts = []
    for path in (train_path, test_path):
        users, items, kidx = [], [], []
        _parse_into(path, delimiter, pos, scale, has_header, user_index, item_index,
                    seen, users, items, kidx)
        parts.append((users, items, kidx))
    num_users, num_items = len(user_index), len(item_index)
    labels = (list(user_index), list(item_index))
    train, test = (
        RatingsMatrix(num_users, num_items, scale,
                      np.array(us, dtype=np.int64), np.array(its, dtype=np.int64),
                      np.array(ks, dtype=np.int64),
                      user_labels=labels[0], item_labels=labels[1])
        for us, its, ks in parts
    )
    return DataSplit(train=train, test=test)


def load_canonical_csv(path, scale: ScoreScale) -> RatingsMatrix:
    return load_delimited(path, ",", ("user", "item", "score"), scale, has_header=True)


def random_split(m: RatingsMatrix, test_fraction: float, seed: int) -> DataSplit:
    """Seeded random train/test split with |test| = round(fraction * n)."""
    if m.n_ratings == 0:
        raise DataError("cannot split an empty ratings matrix")
    if not (0.0 < test_fraction < 1.0):
        raise ConfigurationError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = int(round(test_fraction * m.n_ratings))
    if n_test == 0 or n_test == m.n_ratings:
        raise ConfigurationError(
            f"test_fraction {test_fraction} produces an empty train or test partition"
        )
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m.n_ratings)
    test_mask = np.zeros(m.n_ratings, dtype=bool)
    test_mask[perm[:n_test]] = True
    return DataSplit(train=m.subset(~test_mask), test=m.subset(test_mask))


def kfold(m: RatingsMatrix, k: int, seed: int) -> FoldAssignment:
    """Seeded k-fold partition of the entries; fold sizes differ by at most 1."""
    if k < 2:
        raise ConfigurationError(f"k must be >= 2, got {k}")
    if m.n_ratings < k:
        raise ConfigurationError(f"need at least {k} entries for {k} folds, got {m.n_ratings}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(m.n_ratings)
    fold_of = np.empty(m.n_ratings, dtype=np.int64)
    sizes = np.full(k, m.n_ratings // k, dtype=np.int64)
    sizes[: m.n_ratings % k] += 1
    start = 0
    for f, size in enumerate(sizes):
        fold_of[perm[start:start + size]] = f
        start += size
    return FoldAssignment(fold_of=fold_of, n_folds=k)
