"""Internal 2D polygon helpers shared by geometry and meshgen."""

import numpy as np


def signed_area(points: np.ndarray) -> float:
    """Shoelace area of a closed polygon given as an (n, 2) vertex array."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_scale(points: np.ndarray) -> float:
    """Characteristic length used to make tolerances dimensionless."""
    extent = points.max(axis=0) - points.min(axis=0)
    return max(float(extent.max()), 1.0)


def _orient(p, q, r) -> float:
    return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])


def _segments_cross(p1, p2, q1, q2, eps: float) -> bool:
    """Proper or touching intersection between segments p1p2 and q1q2."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True

    def on_segment(a, b, c):
        # c collinear with ab; is it within the bounding box of ab?
        return (min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps and
                min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps)

    if abs(d1) <= eps and on_segment(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_segment(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_segment(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_segment(p1, p2, q2):
        return True
    return False


def is_simple(points: np.ndarray) -> bool:
    """True if no two non-adjacent polygon edges intersect.

    O(n^2) pairwise test; footprints are small so this is fine.
    """
    n = len(points)
    eps = 1e-12 * polygon_scale(points) ** 2
    for i in range(n):
        p1, p2 = points[i], points[(i + 1) % n]
        for j in range(i + 1, n):
            # skip adjacent edges (they share a vertex by construction)
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            q1, q2 = points[j], points[(j + 1) % n]
            if _segments_cross(p1, p2, q1, q2, eps):
                return False
    return True
