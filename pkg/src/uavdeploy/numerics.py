"""Shared numerical routines: adaptive Gauss-Kronrod quadrature, bracketed
root finding, golden-section maximization with plateau detection, and Poisson
tail helpers.

All quadrature/search routines expect vectorized callables (numpy in, numpy
out) so the calling code can stay loop-free.  Tolerance defaults mirror the
rest of the package: 1e-9 on roots, 1e-8 relative on integrals, 1e-12 on
Poisson tail mass.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


class NoSignChange(ValueError):
    """Bisection bracket endpoints have the same sign."""


class MaxIterExceeded(RuntimeError):
    """Iterative routine hit its iteration cap before reaching tolerance."""


class NonConvergent(RuntimeError):
    """Adaptive quadrature ran out of subdivisions.

    Carries the best value and error estimate reached so the caller can
    decide whether the partial answer is still usable.
    """

    def __init__(self, message: str, value: float, error_estimate: float):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi]; degenerate (lo == hi) encodes a single point."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)


@dataclass(frozen=True)
class Bracket:
    """Root bracket with cached endpoint values."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError("need lo < hi")

    @classmethod
    def evaluate(cls, f, lo: float, hi: float) -> "Bracket":
        return cls(lo=lo, hi=hi, f_lo=float(f(lo)), f_hi=float(f(hi)))


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    n_evals: int


@dataclass(frozen=True)
class GoldenResult:
    x: float
    f_x: float
    flat: bool          # argmax is a plateau, not an isolated peak
    bracket: Interval   # the plateau when flat, else the final search bracket


def bisect(f, lo, hi: float | None = None, tol_x: float = 1e-9,
           max_iter: int = 200) -> float:
    """Root of a scalar function by bisection.

    Accepts either (f, lo, hi) endpoints or (f, Bracket).  Requires f(lo) and
    f(hi) of opposite sign (an exact zero at either endpoint is accepted as
    the root).  Returns the bracket midpoint once it is narrower than tol_x.
    """
    if isinstance(lo, Bracket):
        br = lo
        lo, hi, f_lo, f_hi = br.lo, br.hi, br.f_lo, br.f_hi
    else:
        if hi is None:
            raise ValueError("hi required when lo is not a Bracket")
        if not (hi > lo):
            raise ValueError("need hi > lo")
        f_lo = float(f(lo))
        f_hi = float(f(hi))
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChange(f"f({lo})={f_lo:g} and f({hi})={f_hi:g} have the same sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol_x:
            return mid
        f_mid = float(f(mid))
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    raise MaxIterExceeded(f"bisection did not reach tol_x={tol_x:g} in {max_iter} iterations")


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _plateau_edge(f, x: float, f_x: float, bound: float, tol_f: float) -> float:
    """Furthest point toward `bound` where f stays within tol_f of f_x."""
    span = abs(bound - x)
    if span == 0.0:
        return x
    step = span
    # geometric shrink until the probe ties with the peak value
    while step > 1e-14 * max(1.0, span):
        probe = x + math.copysign(step, bound - x)
        if abs(float(f(probe)) - f_x) <= tol_f:
            break
        step *= 0.5
    else:
        return x
    if step == span:
        return bound
    # tighten the edge between the last accepted and last rejected step
    good, bad = step, 2.0 * step
    for _ in range(20):
        mid = 0.5 * (good + bad)
        probe = x + math.copysign(mid, bound - x)
        if abs(float(f(probe)) - f_x) <= tol_f:
            good = mid
        else:
            bad = mid
    return x + math.copysign(good, bound - x)


def golden_max(f, lo: float, hi: float, tol_x: float = 1e-9,
               flat_tol: float = 1e-12) -> GoldenResult:
    """Golden-section maximization of a unimodal scalar function on [lo, hi].

    After convergence the neighborhood of the argmax is probed for a plateau:
    if f stays within flat_tol of the peak value over at least 0.1% of the
    domain, the result is flagged flat and `bracket` reports the plateau, any
    point of which is an acceptable argmax.
    """
    if not (hi > lo):
        raise ValueError("need hi > lo")
    a, b = lo, hi
    c = b - (b - a) * _INVPHI
    d = a + (b - a) * _INVPHI
    f_c = float(f(c))
    f_d = float(f(d))
    while b - a > tol_x:
        if f_c >= f_d:
            b, d, f_d = d, c, f_c
            c = b - (b - a) * _INVPHI
            f_c = float(f(c))
        else:
            a, c, f_c = c, d, f_d
            d = a + (b - a) * _INVPHI
            f_d = float(f(d))
    if f_c >= f_d:
        x, f_x = c, f_c
    else:
        x, f_x = d, f_d
    tol_f = flat_tol * max(1.0, abs(f_x))
    left = _plateau_edge(f, x, f_x, lo, tol_f)
    right = _plateau_edge(f, x, f_x, hi, tol_f)
    flat = (right - left) >= 1e-3 * (hi - lo)
    bracket = Interval(left, right) if flat else Interval(a, b)
    return GoldenResult(x=x, f_x=f_x, flat=flat, bracket=bracket)


# 15-point Kronrod extension of 7-point Gauss, standard QUADPACK abscissae.
_K15_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_K15_W = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
# The embedded Gauss-7 rule lives on every second Kronrod node.
_G7_W = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


def _gk_segments(f, los: np.ndarray, his: np.ndarray):
    """Kronrod value and |K15-G7| error estimate per segment, vectorized."""
    mids = 0.5 * (los + his)
    halfs = 0.5 * (his - los)
    pts = mids[:, None] + halfs[:, None] * _K15_X[None, :]
    fv = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    vals = halfs * (fv * _K15_W).sum(axis=1)
    coarse = halfs * (fv[:, 1::2] * _G7_W).sum(axis=1)
    errs = np.abs(vals - coarse)
    return vals, errs


def quad_1d(f, a: float, b: float, rel_tol: float = 1e-8, abs_tol: float = 0.0,
            max_subdivisions: int = 4000) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a vectorized f over [a, b].

    Splits the segment with the largest |K15-G7| discrepancy until the summed
    error estimate drops below max(rel_tol*|integral|, abs_tol).  Raises
    NonConvergent (carrying the partial value) if the subdivision budget runs
    out first.
    """
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    los = np.array([a], dtype=float)
    his = np.array([b], dtype=float)
    vals, errs = _gk_segments(f, los, his)
    # max-heap on error via negated key; entries are (−err, id) into dicts
    segs = {0: (a, b, vals[0], errs[0])}
    heap = [(-errs[0], 0)]
    next_id = 1
    n_evals = 15
    for _ in range(max_subdivisions):
        total = sum(v for (_, _, v, _) in segs.values())
        err_total = sum(e for (_, _, _, e) in segs.values())
        if err_total <= max(rel_tol * abs(total), abs_tol):
            return QuadResult(float(total), float(err_total), n_evals)
        while True:
            neg_err, sid = heapq.heappop(heap)
            if sid in segs and -neg_err == segs[sid][3]:
                break
        lo, hi, _, _ = segs.pop(sid)
        mid = 0.5 * (lo + hi)
        clos = np.array([lo, mid])
        chis = np.array([mid, hi])
        cvals, cerrs = _gk_segments(f, clos, chis)
        n_evals += 30
        for i in range(2):
            segs[next_id] = (clos[i], chis[i], cvals[i], cerrs[i])
            heapq.heappush(heap, (-cerrs[i], next_id))
            next_id += 1
    total = sum(v for (_, _, v, _) in segs.values())
    err_total = sum(e for (_, _, _, e) in segs.values())
    raise NonConvergent(
        f"quad_1d used {max_subdivisions} subdivisions without reaching rel_tol={rel_tol:g}",
        float(total), float(err_total))


def _gk_cells(f, cells: np.ndarray):
    """Tensor K15xK15 value and error estimate per rectangular cell."""
    x0, x1, y0, y1 = cells[:, 0], cells[:, 1], cells[:, 2], cells[:, 3]
    mx = 0.5 * (x0 + x1)
    hx = 0.5 * (x1 - x0)
    my = 0.5 * (y0 + y1)
    hy = 0.5 * (y1 - y0)
    px = mx[:, None] + hx[:, None] * _K15_X[None, :]          # (m, 15)
    py = my[:, None] + hy[:, None] * _K15_X[None, :]
    xx = np.broadcast_to(px[:, :, None], (len(cells), 15, 15))
    yy = np.broadcast_to(py[:, None, :], (len(cells), 15, 15))
    fv = np.asarray(f(xx.ravel(), yy.ravel()), dtype=float).reshape(xx.shape)
    wk = _K15_W[:, None] * _K15_W[None, :]
    vals = hx * hy * (fv * wk).sum(axis=(1, 2))
    wg = _G7_W[:, None] * _G7_W[None, :]
    coarse = hx * hy * (fv[:, 1::2, 1::2] * wg).sum(axis=(1, 2))
    errs = np.abs(vals - coarse)
    return vals, errs


def quad_2d(f, x0: float, x1: float, y0: float, y1: float, rel_tol: float = 1e-8,
            abs_tol: float = 0.0, max_cells: int = 4000) -> QuadResult:
    """Adaptive tensor Gauss-Kronrod integral of f(x, y) over a rectangle.

    f must broadcast over equally-shaped coordinate arrays.  The worst cell
    (largest |K-G| discrepancy) is split into four quadrants per round.
    """
    cells = np.array([[x0, x1, y0, y1]], dtype=float)
    vals, errs = _gk_cells(f, cells)
    segs = {0: (cells[0], vals[0], errs[0])}
    heap = [(-errs[0], 0)]
    next_id = 1
    n_evals = 225
    while True:
        total = sum(v for (_, v, _) in segs.values())
        err_total = sum(e for (_, _, e) in segs.values())
        if err_total <= max(rel_tol * abs(total), abs_tol):
            return QuadResult(float(total), float(err_total), n_evals)
        if len(segs) + 3 > max_cells:
            raise NonConvergent(
                f"quad_2d used {max_cells} cells without reaching rel_tol={rel_tol:g}",
                float(total), float(err_total))
        while True:
            neg_err, sid = heapq.heappop(heap)
            if sid in segs and -neg_err == segs[sid][2]:
                break
        (cx0, cx1, cy0, cy1), _, _ = segs.pop(sid)
        mx = 0.5 * (cx0 + cx1)
        my = 0.5 * (cy0 + cy1)
        quads = np.array([
            [cx0, mx, cy0, my], [mx, cx1, cy0, my],
            [cx0, mx, my, cy1], [mx, cx1, my, cy1],
        ])
        qvals, qerrs = _gk_cells(f, quads)
        n_evals += 4 * 225
        for i in range(4):
            segs[next_id] = (quads[i], qvals[i], qerrs[i])
            heapq.heappush(heap, (-qerrs[i], next_id))
            next_id += 1


def poisson_pmf_log(k, mu: float):
    """log P[X = k] for X ~ Poisson(mu), stable for large k and mu."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    k = np.asarray(k)
    if np.any(k < 0):
        raise ValueError("k must be nonnegative")
    from scipy.special import gammaln
    return k * math.log(mu) - mu - gammaln(k + 1.0)


def poisson_quantile_upper(mu: float, tail_mass: float) -> int:
    """Smallest K with P[X > K] < tail_mass for X ~ Poisson(mu)."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    if not (0 < tail_mass < 1):
        raise ValueError("tail_mass must lie in (0, 1)")
    k = int(stats.poisson.isf(tail_mass, mu))
    k = max(k - 2, 0)
    while stats.poisson.sf(k, mu) >= tail_mass:
        k += 1
    while k > 0 and stats.poisson.sf(k - 1, mu) < tail_mass:
        k -= 1
    return k
