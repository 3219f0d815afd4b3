"""Exact area of intersection between a disk and an axis-aligned rectangle.

Computed by integrating the horizontal chord length over y.  The chord
endpoints switch between the rectangle's sides and the circle at
y = +-sqrt(r^2 - x_side^2); splitting at those breakpoints makes each piece a
combination of constants and circular-segment antiderivatives, so the result
is exact up to floating point.
"""

from __future__ import annotations

import math


def _circseg(y: float, r: float) -> float:
    """Antiderivative of sqrt(r^2 - y^2)."""
    t = max(-1.0, min(1.0, y / r))
    return 0.5 * (y * math.sqrt(max(0.0, r * r - y * y)) + r * r * math.asin(t))


def circle_rect_intersection_area(cx: float, cy: float, r: float,
                                  x0: float, x1: float, y0: float, y1: float) -> float:
    """Area of disk((cx, cy), r) intersected with [x0, x1] x [y0, y1]."""
    if r <= 0.0 or x1 <= x0 or y1 <= y0:
        return 0.0
    # rectangle in disk-centered frame
    a, b = x0 - cx, x1 - cx
    lo, hi = max(y0 - cy, -r), min(y1 - cy, r)
    if hi <= lo:
        return 0.0
    cuts = {lo, hi}
    for side in (a, b):
        if abs(side) < r:
            yc = math.sqrt(r * r - side * side)
            for y in (-yc, yc):
                if lo < y < hi:
                    cuts.add(y)
    ys = sorted(cuts)
    area = 0.0
    for p, q in zip(ys[:-1], ys[1:]):
        m = 0.5 * (p + q)
        half = math.sqrt(max(0.0, r * r - m * m))
        left = max(a, -half)
        right = min(b, half)
        if right <= left:
            continue
        # each edge is either a rectangle side (constant) or the circle arc;
        # on a tie the side is tangent and the arc binds everywhere else
        if b < half:
            upper = b * (q - p)
        else:
            upper = _circseg(q, r) - _circseg(p, r)
        if a > -half:
            lower = a * (q - p)
        else:
            lower = -(_circseg(q, r) - _circseg(p, r))
        area += upper - lower
    return area
