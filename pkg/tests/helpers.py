"""Brute-force reference implementations used as independent test oracles."""

from itertools import combinations

import numpy as np


def brute_hull_vertices(pts: np.ndarray) -> np.ndarray:
    """Hull vertices by point-in-triangle elimination (O(n^3) triangles)."""
    pts = np.asarray(pts, dtype=np.float64)
    n = len(pts)
    if n <= 2:
        return np.unique(pts, axis=0)
    span = pts.max(axis=0) - pts.min(axis=0)
    tol = 1e-12 * max(float(span.max()), 1.0) ** 2
    tris = np.array(list(combinations(range(n), 3)))
    a, b, c = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]

    def cross(u, v, p):
        # (T, n) cross products of (v - u) x (p - u)
        d = v - u
        return d[:, None, 0] * (p[None, :, 1] - u[:, None, 1]) - d[:, None, 1] * (
            p[None, :, 0] - u[:, None, 0]
        )

    s1 = cross(a, b, pts)
    s2 = cross(b, c, pts)
    s3 = cross(c, a, pts)
    inside = ((s1 > tol) & (s2 > tol) & (s3 > tol)) | ((s1 < -tol) & (s2 < -tol) & (s3 < -tol))
    interior = inside.any(axis=0)
    return np.unique(pts[~interior], axis=0)


def brute_knn(pts: np.ndarray, p: np.ndarray, k: int) -> list[int]:
    """1-based indices of the k nearest points, ties to the lowest index."""
    d = np.linalg.norm(np.asarray(pts) - np.asarray(p), axis=1)
    return [int(i) + 1 for i in np.argsort(d, kind="stable")[:k]]


def brute_first_below(values, threshold: float, max_steps: int):
    """First 1-based position with value <= threshold, or None within the cap."""
    for j, v in enumerate(values[:max_steps], start=1):
        if v <= threshold:
            return j
    return None


def random_tuple(gen: np.random.Generator, n: int, dim: int = 2, scale: float = 1.0) -> np.ndarray:
    return gen.random((n, dim)) * scale
