"""Exact 2-D convex-polygon geometry: hull construction, intersection areas,
and one-sided Hausdorff-style excess for containment-with-slack checks."""

from __future__ import annotations

import math

import numpy as np

# orientation tolerance, relative to the bounding-box scale of the input
ORIENT_EPS = 1e-9


class ConvexPolygon:
    """Convex polygon as a counter-clockwise vertex list.

    Inputs with fewer than 3 non-collinear points produce a degenerate
    polygon (a point or a segment) flagged via ``degenerate``.
    """

    __slots__ = ("vertices", "degenerate")

    def __init__(self, vertices, degenerate: bool = False):
        arr = np.array(vertices, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ValueError(f"vertices must be an (m, 2) array, got shape {arr.shape}")
        arr.setflags(write=False)
        self.vertices = arr
        self.degenerate = bool(degenerate)

    @property
    def area(self) -> float:
        if self.degenerate:
            return 0.0
        return shoelace_area(self.vertices)

    def __len__(self) -> int:
        return self.vertices.shape[0]


def shoelace_area(vertices: np.ndarray) -> float:
    """Unsigned polygon area by the shoelace formula."""
    v = np.asarray(vertices, dtype=np.float64)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    s = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
    return abs(s) / 2.0


def _bbox_scale(pts: np.ndarray) -> float:
    span = pts.max(axis=0) - pts.min(axis=0)
    return max(float(span.max()), 1.0)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> ConvexPolygon:
    """Convex hull by Andrew's monotone chain.

    Collinear points are dropped (orientation tolerance ORIENT_EPS relative
    to the bounding-box scale); inputs whose hull has fewer than 3 vertices
    come back flagged degenerate.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must be an (n, 2) array, got shape {pts.shape}")
    if pts.shape[0] < 1:
        raise ValueError("cannot build a hull from an empty point set")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")

    pts = np.unique(pts, axis=0)  # also sorts lexicographically
    if len(pts) == 1:
        return ConvexPolygon(pts, degenerate=True)
    tol = ORIENT_EPS * _bbox_scale(pts) ** 2

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= tol:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        return ConvexPolygon(np.array([pts[0], pts[-1]]), degenerate=True)
    hull = np.asarray(hull)
    # monotone chain emits counter-clockwise order; guard against sign slips
    x, y = hull[:, 0], hull[:, 1]
    signed = np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)
    if signed < 0:
        hull = hull[::-1]
    return ConvexPolygon(hull)


def _clip_convex(subject: np.ndarray, clip: np.ndarray, tol: float) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex subject by a CCW convex clip polygon."""
    out = [tuple(p) for p in subject]
    m = len(clip)
    for i in range(m):
        if not out:
            break
        a = clip[i]
        b = clip[(i + 1) % m]
        ex, ey = b[0] - a[0], b[1] - a[1]
        inp = out
        out = []
        prev = inp[-1]
        prev_side = ex * (prev[1] - a[1]) - ey * (prev[0] - a[0])
        for cur in inp:
            cur_side = ex * (cur[1] - a[1]) - ey * (cur[0] - a[0])
            if cur_side >= -tol:
                if prev_side < -tol:
                    t = prev_side / (prev_side - cur_side)
                    out.append(
                        (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
                    )
                out.append(cur)
            elif prev_side >= -tol:
                t = prev_side / (prev_side - cur_side)
                out.append(
                    (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
                )
            prev, prev_side = cur, cur_side
    return np.asarray(out, dtype=np.float64).reshape(-1, 2)


def _degenerate_equal(a: ConvexPolygon, b: ConvexPolygon) -> bool:
    va = np.unique(a.vertices, axis=0)
    vb = np.unique(b.vertices, axis=0)
    return va.shape == vb.shape and np.array_equal(va, vb)


def jaccard(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Area of intersection over area of union for two convex polygons.

    Degenerate polygons score 0 against anything except an identical
    degenerate polygon, which scores 1.
    """
    if a.degenerate or b.degenerate:
        return 1.0 if (a.degenerate and b.degenerate and _degenerate_equal(a, b)) else 0.0
    scale = _bbox_scale(np.vstack([a.vertices, b.vertices]))
    inter = _clip_convex(a.vertices, b.vertices, ORIENT_EPS * scale**2)
    inter_area = shoelace_area(inter) if len(inter) >= 3 else 0.0
    union = a.area + b.area - inter_area
    if union <= 0:
        return 0.0
    return min(inter_area / union, 1.0)


def _point_segment_dist(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float((p - a) @ ab) / denom
    t = min(max(t, 0.0), 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def point_polygon_distance(p, poly: ConvexPolygon) -> float:
    """Euclidean distance from a point to a convex polygon (0 inside)."""
    if poly.degenerate:
        raise ValueError("polygon is degenerate")
    p = np.asarray(p, dtype=np.float64)
    v = poly.vertices
    m = len(v)
    tol = ORIENT_EPS * _bbox_scale(v) ** 2
    inside = True
    best = math.inf
    for i in range(m):
        a, b = v[i], v[(i + 1) % m]
        if _cross(a, b, p) < -tol:
            inside = False
        best = min(best, _point_segment_dist(p, a, b))
    return 0.0 if inside else best


def directed_excess(outer_candidate: ConvexPolygon, inner: ConvexPolygon) -> float:
    """Smallest gamma such that ``inner`` fits inside ``outer_candidate``
    expanded by a ball of radius gamma.

    Equals the max over the inner polygon's vertices of their distance to the
    outer polygon (the distance-to-a-convex-set function is convex, so its
    max over a polytope is attained at a vertex); 0 when inner is contained.
    """
    if outer_candidate.degenerate or inner.degenerate:
        raise ValueError("directed_excess requires non-degenerate polygons")
    return max(point_polygon_distance(p, outer_candidate) for p in inner.vertices)
