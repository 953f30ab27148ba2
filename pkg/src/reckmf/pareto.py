"""Pareto machinery for the two maximized objectives (1 - MAE, coverage).

Plain functions over points; the genetic search builds on these.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError


@dataclass(frozen=True)
class ObjectivePoint:
    one_minus_mae: float
    coverage: float

    def as_tuple(self):
        return (self.one_minus_mae, self.coverage)


def _as_point_array(points) -> np.ndarray:
    rows = []
    for p in points:
        if isinstance(p, ObjectivePoint):
            rows.append(p.as_tuple())
        else:
            rows.append((float(p[0]), float(p[1])))
    return np.asarray(rows, dtype=float).reshape(len(rows), 2)


def dominates(a, b) -> bool:
    """True when a is at least as good on both objectives and better on one."""
    (a1, a2), (b1, b2) = _as_point_array([a, b])
    return a1 >= b1 and a2 >= b2 and (a1 > b1 or a2 > b2)


def non_dominated_sort(points) -> list:
    """Fast non-dominated sorting; returns fronts as lists of input indices."""
    pts = _as_point_array(points)
    n = len(pts)
    if n == 0:
        raise DataError("cannot sort zero points")
    ge = (pts[:, None, 0] >= pts[None, :, 0]) & (pts[:, None, 1] >= pts[None, :, 1])
    ne = (pts[:, None, 0] != pts[None, :, 0]) | (pts[:, None, 1] != pts[None, :, 1])
    dom = ge & ne  # dom[a, b]: a dominates b
    n_dominators = dom.sum(axis=0)
    dominated_by = [np.flatnonzero(dom[a]) for a in range(n)]
    fronts = []
    current = list(np.flatnonzero(n_dominators == 0))
    while current:
        fronts.append(current)
        nxt = []
        for a in current:
            for b in dominated_by[a]:
                n_dominators[b] -= 1
                if n_dominators[b] == 0:
                    nxt.append(int(b))
        current = sorted(nxt)
    return fronts


def crowding_distance(front) -> np.ndarray:
    """Crowding distance per point of a single front.

    Boundary points on each objective get infinity; interior points sum the
    neighbor gaps normalized by that objective's range.
    """
    pts = _as_point_array(front)
    n = len(pts)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for obj in range(2):
        order = np.argsort(pts[:, obj], kind="stable")
        vals = pts[order, obj]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span <= 0:
            continue
        interior = order[1:-1]
        dist[interior] += (vals[2:] - vals[:-2]) / span
    return dist


def _fitness_of(individual):
    fit = getattr(individual, "fitness", individual)
    return fit


def pareto_front(individuals) -> list:
    """The non-dominated subset, sorted by coverage ascending for stable export."""
    items = list(individuals)
    if not items:
        raise DataError("cannot take the Pareto front of zero individuals")
    points = [_fitness_of(ind) for ind in items]
    first = non_dominated_sort(points)[0]
    chosen = [items[i] for i in first]
    keys = _as_point_array([points[i] for i in first])
    order = np.lexsort((keys[:, 0], keys[:, 1]))
    return [chosen[i] for i in order]


def hypervolume_2d(points, reference) -> float:
    """Area dominated by `points` above the reference corner (both maximized).

    Exact sweep over the non-dominated subset; dominated or duplicate points
    never change the result.
    """
    pts = _as_point_array(points)
    ref = _as_point_array([reference])[0]
    if len(pts) == 0:
        return 0.0
    if np.any(pts[:, 0] < ref[0]) or np.any(pts[:, 1] < ref[1]):
        raise DataError("every point must dominate or equal the reference point")
    keep_idx = [i for i in non_dominated_sort(pts)[0]]
    front = pts[keep_idx]
    order = np.argsort(-front[:, 0], kind="stable")
    front = front[order]
    area = 0.0
    y_floor = ref[1]
    for x, y in front:
        if y > y_floor:
            area += (x - ref[0]) * (y - y_floor)
            y_floor = y
    return float(area)
