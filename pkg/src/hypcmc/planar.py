"""Planar polygon diagnostics for profile curves: closure, winding
number, and self-intersection by a segment sweep.

These are diagnostics on sampled polygons, never proofs about the
underlying smooth curve.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError

CLOSURE_TOL = 1e-6
SWEEP_TOL = 1e-9


def polygon_is_closed(points, tol: float = CLOSURE_TOL) -> bool:
    """True when first and last vertices coincide within tol."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise DomainError("need an (N, 2) array of at least 2 points")
    return bool(np.hypot(*(pts[0] - pts[-1])) <= tol)


def winding_number(points, center=(0.0, 0.0)) -> int:
    """Winding of the closed polygon about a center, by angle summation."""
    pts = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
    if np.any(np.hypot(pts[:, 0], pts[:, 1]) == 0):
        raise DomainError("polygon passes through the center")
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    d = np.diff(np.concatenate([ang, ang[:1]]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(round(float(np.sum(d)) / (2 * np.pi)))


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_cross(p, q, r, s, tol):
    """Proper crossing test with an area tolerance: touches within tol
    of a shared point do not count."""
    d1 = _orient(r[0], r[1], s[0], s[1], p[0], p[1])
    d2 = _orient(r[0], r[1], s[0], s[1], q[0], q[1])
    d3 = _orient(p[0], p[1], q[0], q[1], r[0], r[1])
    d4 = _orient(p[0], p[1], q[0], q[1], s[0], s[1])
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and \
       ((d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)):
        return True
    # collinear overlap: all orientations vanish and projections overlap
    if max(abs(d1), abs(d2), abs(d3), abs(d4)) <= tol:
        lo1, hi1 = sorted((p[0], q[0]))
        lo2, hi2 = sorted((r[0], s[0]))
        if hi1 - lo2 > tol and hi2 - lo1 > tol:
            return True
        lo1, hi1 = sorted((p[1], q[1]))
        lo2, hi2 = sorted((r[1], s[1]))
        if hi1 - lo2 > tol and hi2 - lo1 > tol:
            return True
    return False


def has_self_intersection(points, closed: bool = True,
                          tol: float = SWEEP_TOL) -> bool:
    """Segment-sweep self-intersection test on a sampled polygon.

    Consecutive segments (and the wrap-around pair when closed) are
    skipped since they legitimately share a vertex.  Segments are sorted
    by their minimum x and pruned by their maximum x, which keeps the
    pair tests near-linear for non-pathological curves.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise DomainError("need an (N, 2) array of at least 3 points")
    if closed and np.hypot(*(pts[0] - pts[-1])) <= tol:
        pts = pts[:-1]
    nseg = len(pts) if closed else len(pts) - 1
    a = pts
    b = np.roll(pts, -1, axis=0) if closed else pts[1:]
    segs = [(min(a[i][0], b[i][0]), max(a[i][0], b[i][0]), i)
            for i in range(nseg)]
    segs.sort()

    def adjacent(i, j):
        if abs(i - j) == 1:
            return True
        return closed and {i, j} == {0, nseg - 1}

    for si in range(nseg):
        xmin_i, xmax_i, i = segs[si]
        for sj in range(si + 1, nseg):
            xmin_j, _, j = segs[sj]
            if xmin_j > xmax_i + tol:
                break
            if adjacent(i, j):
                continue
            if _segments_cross(a[i], b[i], a[j], b[j], tol):
                return True
    return False
