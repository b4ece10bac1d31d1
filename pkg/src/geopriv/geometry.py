"""Metrics over point tuples and the Lipschitz functionals the mechanisms query.

Index values crossing this API (arguments and return values) are 1-based, so
they line up with the usual mathematical convention for tuples indexed by
[n]; storage is plain 0-based numpy underneath.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np


class PointTuple:
    """Ordered tuple of n points in d-dimensional Euclidean space."""

    __slots__ = ("points",)

    def __init__(self, points):
        arr = np.array(points, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"points must be an (n, d) array, got shape {arr.shape}")
        n, d = arr.shape
        if n < 1 or d < 1:
            raise ValueError(f"need at least one point of dimension >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coordinates must be finite")
        arr.setflags(write=False)
        self.points = arr

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"PointTuple(n={self.n}, dim={self.dim})"


def _per_point_dists(x: PointTuple, y: PointTuple) -> np.ndarray:
    if x.points.shape != y.points.shape:
        raise ValueError(
            f"point tuples must share shape, got {x.points.shape} and {y.points.shape}"
        )
    return np.linalg.norm(x.points - y.points, axis=1)


def dist_inf(x: PointTuple, y: PointTuple) -> float:
    """Max over i of the Euclidean distance between the i-th points."""
    return float(_per_point_dists(x, y).max())


def dist_1(x: PointTuple, y: PointTuple) -> float:
    """Sum of per-point Euclidean distances."""
    return float(_per_point_dists(x, y).sum())


def dist_2(x: PointTuple, y: PointTuple) -> float:
    """Root-sum-of-squares of per-point Euclidean distances."""
    return float(np.sqrt((_per_point_dists(x, y) ** 2).sum()))


def center(x: PointTuple) -> np.ndarray:
    """Per-coordinate midpoint between min and max coordinate (2-D only).

    This bounding-box centre is sqrt(2)-Lipschitz in the tuple under the max
    per-point metric.
    """
    if x.dim != 2:
        raise ValueError(f"center is defined for 2-D tuples, got dim {x.dim}")
    return 0.5 * (x.points.min(axis=0) + x.points.max(axis=0))


def max_radius(x: PointTuple, q) -> float:
    """Max over i of ||x_i - q||; 1-Lipschitz in x under the max per-point metric."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (x.dim,):
        raise ValueError(f"query point must have shape ({x.dim},), got {q.shape}")
    return float(np.linalg.norm(x.points - q, axis=1).max())


def _validate_indices(indices: Iterable[int] | None, n: int) -> list[int]:
    if indices is None:
        return list(range(1, n + 1))
    idx = [int(i) for i in indices]
    if not idx:
        raise ValueError("index subset must be nonempty")
    for i in idx:
        if not 1 <= i <= n:
            raise ValueError(f"index {i} outside the valid range 1..{n}")
    return idx


def min_dist(x: PointTuple, q, indices: Iterable[int] | None = None) -> tuple[int, float]:
    """Index in the (1-based) subset minimizing ||x_i - q||, and that distance.

    Ties break to the lowest position in the subset.  The distance itself is
    1-Lipschitz in x under the max per-point metric.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (x.dim,):
        raise ValueError(f"query point must have shape ({x.dim},), got {q.shape}")
    idx = _validate_indices(indices, x.n)
    sub = x.points[np.asarray(idx, dtype=np.intp) - 1]
    d = np.linalg.norm(sub - q, axis=1)
    pos = int(np.argmin(d))
    return idx[pos], float(d[pos])


def diameter(x: PointTuple) -> float:
    """Max pairwise distance (exact O(n^2) scan, blocked for memory)."""
    pts = x.points
    n = len(pts)
    if n == 1:
        return 0.0
    sq = (pts**2).sum(axis=1)
    best = 0.0
    step = 256
    for i in range(0, n, step):
        block = pts[i : i + step]
        d2 = sq[i : i + step, None] + sq[None, :] - 2.0 * (block @ pts.T)
        best = max(best, float(d2.max()))
    return math.sqrt(max(best, 0.0))
