"""Closed-form performance of the majority-vote placement in a square cell.

The square cell splits into four quadrant sectors and the UAV displaces
along a diagonal toward the most crowded one, so the 1D machinery does not
carry over directly: the joint anchor/sector probabilities need a
convolution over per-sector Poisson counts, the throughput expectation is a
planar integral with no elementary antiderivative, and the coverage region
is a disk clipped against a square.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import stats

from .analytic1d import DisplacementProbs
from .geometry import circle_rect_intersection_area
from .model import Placement, SystemParams
from .numerics import Interval, bisect, poisson_pmf_log, poisson_quantile_upper, quad_2d

SQRT2 = math.sqrt(2.0)

_cache_lock = threading.Lock()


@lru_cache(maxsize=256)
def _displacement_probs_2d_cached(mu: float, n_sectors: int, tol: float):
    m = n_sectors
    rate = mu / m
    kept_mass = -math.expm1(-mu)
    # per-sector count cap: self-consistent Poisson quantile so the union of
    # dropped tails stays below tol
    cap = poisson_quantile_upper(rate, tol / m)
    for _ in range(4):
        refined = poisson_quantile_upper(rate, tol / (m * max(cap, 1)))
        if refined <= cap:
            break
        cap = refined
    pmf = np.exp(poisson_pmf_log(np.arange(cap + 1), rate))

    # majority sector is the typical user's own sector: the other m-1 sector
    # counts each stay strictly below it
    q_own = 0.0
    for k_top in range(1, cap + 1):
        below = pmf[:k_top]
        conv = below
        for _ in range(m - 2):
            conv = np.convolve(conv, below)
        c = np.arange(conv.size)
        q_own += pmf[k_top] * float(np.sum(conv * (k_top / (k_top + c))))

    # majority elsewhere: the typical user's sector count enters weighted by
    # itself (the chance the typical user is one of its members)
    q_other = 0.0
    for k_top in range(2, cap + 1):
        below = pmf[:k_top]
        conv = below * np.arange(k_top)
        for _ in range(m - 2):
            conv = np.convolve(conv, below)
        c = np.arange(conv.size)
        q_other += pmf[k_top] * float(np.sum(conv / (k_top + c)))

    q_own /= kept_mass
    q_other /= kept_mass
    q_center = 1.0 / m - q_own - (m - 1) * q_other
    bound = m * float(stats.poisson.sf(cap, rate)) / kept_mass
    return (q_center, q_own) + (q_other,) * (m - 1), bound


def displacement_probs_2d(mu: float, n_sectors: int = 4,
                          tol: float = 1e-12) -> DisplacementProbs:
    """Joint anchor/sector probabilities for the square cell.

    Returns q of length n_sectors+1: q[0] for the tie anchor at the cell
    center, q[1] for the anchor inside the typical user's sector, and one
    (shared) value per remaining sector. Entries sum to 1/n_sectors within
    the recorded truncation bound.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if n_sectors < 2:
        raise ValueError("need at least two sectors")
    if tol <= 0:
        raise ValueError("tol must be positive")
    with _cache_lock:
        q, bound = _displacement_probs_2d_cached(float(mu), int(n_sectors),
                                                 float(tol))
    return DisplacementProbs(q=q, mu=mu, truncation_error_bound=bound)


def avg_throughput_2d(beta: float, mu: float, params: SystemParams, R: float,
                      tol: float = 1e-8) -> float:
    """Mean downlink throughput (bit/s/Hz) of the typical user under
    majority-vote displacement with factor beta, square cell of side 2R.

    The per-anchor conditional expectations have no elementary closed form;
    each is evaluated by adaptive 2D quadrature to the requested relative
    tolerance.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    dp = displacement_probs_2d(mu)
    a, h = params.link_budget_a, params.altitude_h

    def omega(ax: float, ay: float) -> float:
        def f(x, y):
            d2 = (x - ax) ** 2 + (y - ay) ** 2 + h * h
            return np.log2(1.0 + a / d2)
        return quad_2d(f, 0.0, R, 0.0, R, rel_tol=tol).value / (R * R)

    b = beta * R
    w_center = omega(0.0, 0.0)
    w_own = omega(b, b)
    w_adjacent = omega(-b, b)
    w_opposite = omega(-b, -b)
    return 4.0 * (dp.q0 * w_center + dp.q1 * w_own
                  + dp.q[2] * (2.0 * w_adjacent + w_opposite))


@dataclass(frozen=True)
class SpecialFunctions:
    """Edge antiderivatives of the planar throughput kernel.

    Arguments are cell-size fractions: z the lateral offset of the
    integration line from the anchor, v the extent along it. All three
    vanish when their angular argument does, which pins the constants of
    integration.
    """

    f: Callable[[float, float], float]
    g: Callable[[float, float], float]
    s: Callable[[float, float], float]


def special_functions(params: SystemParams, R: float) -> SpecialFunctions:
    a, h = params.link_budget_a, params.altitude_h

    def f(z: float, v: float) -> float:
        c = math.sqrt(h * h + z * z * R * R)
        return c * math.atan(v * R / c)

    def g(z: float, v: float) -> float:
        c = math.sqrt(a + h * h + z * z * R * R)
        return c * math.atan(v * R / c)

    def s(z: float, v: float) -> float:
        return z * R * math.log1p(a / (h * h + (z * z + v * v) * R * R))

    return SpecialFunctions(f=f, g=g, s=s)


def throughput_gradient_residual_2d(beta: float, q1: float, q2: float,
                                    params: SystemParams, R: float) -> float:
    """Stationarity residual of the 2D average throughput in beta.

    Positive while displacing further still helps, negative past the
    optimum; the optimal factor is its root.
    """
    sf = special_functions(params, R)
    f, g, s = sf.f, sf.g, sf.s
    b = beta
    c = 1.0 - beta
    d = 1.0 + beta
    mixed = (2.0 * f(c, b) - 2.0 * f(b, b) - 2.0 * f(b, c)
             + 2.0 * g(b, b) + 2.0 * g(b, c) - 2.0 * g(c, b)
             + s(b, b) + s(c, b) - s(b, c))
    own = 2.0 * f(c, c) - 2.0 * g(c, c) - s(c, c)
    far = (2.0 * f(c, d) - 2.0 * f(d, c) - 2.0 * f(d, d)
           + 2.0 * g(d, c) + 2.0 * g(d, d) - 2.0 * g(c, d)
           + s(d, d) + s(c, d) - s(d, c))
    return (q1 - q2) * mixed + q1 * own + q2 * far


def optimal_beta_throughput_2d(mu: float, params: SystemParams, R: float,
                               tol: float = 1e-9) -> float:
    """Displacement factor maximizing the 2D average throughput."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    dp = displacement_probs_2d(mu)

    def residual(beta: float) -> float:
        return throughput_gradient_residual_2d(beta, dp.q1, dp.q[2], params, R)

    return bisect(residual, 0.0, 0.5, tol_x=1e-13)


def sector_coverage_fraction(anchor, rho: float, R: float) -> float:
    """Fraction of the typical user's square sector within distance rho of
    the anchor (a Placement or a coordinate pair)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if isinstance(anchor, Placement):
        coords = anchor.coords
    else:
        coords = tuple(anchor)
    if len(coords) != 2:
        raise ValueError("anchor must be planar")
    ax, ay = coords
    return circle_rect_intersection_area(ax, ay, rho, 0.0, R, 0.0, R) / (R * R)


def success_prob_2d(beta: float, rho: float, mu: float, R: float,
                    tol: float = 1e-12) -> float:
    """Probability the typical user falls inside the UAV coverage disk."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    dp = displacement_probs_2d(mu, tol=tol)
    b = beta * R
    eta_center = sector_coverage_fraction((0.0, 0.0), rho, R)
    eta_own = sector_coverage_fraction((b, b), rho, R)
    eta_adjacent = sector_coverage_fraction((-b, b), rho, R)
    eta_opposite = sector_coverage_fraction((-b, -b), rho, R)
    return 4.0 * (dp.q0 * eta_center + dp.q1 * eta_own
                  + dp.q[2] * (2.0 * eta_adjacent + eta_opposite))


def _sqrt_clamped(x: float) -> float:
    return math.sqrt(x) if x > 0.0 else 0.0


def _own_edge_root(beta: float, rho: float, q1: float, q2: float,
                   R: float) -> float:
    return ((q1 - q2) * _sqrt_clamped(rho * rho - beta * beta * R * R)
            - q1 * _sqrt_clamped(rho * rho - (1.0 - beta) ** 2 * R * R))


def _adjacent_edge_root(beta: float, rho: float, q1: float, q2: float,
                        R: float) -> float:
    return ((q1 - q2) * (beta * R + _sqrt_clamped(rho * rho - beta * beta * R * R))
            - 2.0 * q1 * _sqrt_clamped(rho * rho - (1.0 - beta) ** 2 * R * R))


def _far_corner_root(beta: float, rho: float, q1: float, q2: float,
                     R: float) -> float:
    return ((1.0 - beta) * (q1 - q2) * R
            + 2.0 * q2 * _sqrt_clamped(rho * rho - (1.0 + beta) ** 2 * R * R)
            - (q1 + q2) * _sqrt_clamped(rho * rho - (1.0 - beta) ** 2 * R * R))


_BREAKPOINT_SNAP = 1e-12


def optimal_beta_success_2d(rho: float, mu: float, R: float,
                            tol: float = 1e-9) -> Interval:
    """Displacement factor(s) maximizing the 2D success probability.

    Small disks admit a whole interval of maximizers; past that the
    maximizer is unique and the governing balance condition changes as the
    disk successively reaches the sector edges and corners. Which regime
    applies depends on the load through the anchor probabilities.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    dp = displacement_probs_2d(mu)
    q1, q2 = dp.q1, dp.q[2]

    edge_own = 0.5 * R
    edge_adjacent = (SQRT2 * R * q1
                     * (math.sqrt(q1 * q1 + 2.0 * q1 * q2 - q2 * q2) - q1)
                     / (q2 * (2.0 * q1 - q2)))
    edge_closed = R * math.sqrt(q1 * q1 + q2 * q2) / (SQRT2 * q1)
    edge_far = 2.0 * R / (1.0 + (q1 + q2) / math.sqrt(2.0 * (q1 * q1 + q2 * q2)))
    edge_zero = SQRT2 * R
    # floating point can disorder near-coincident regime edges at extreme
    # loads; force a monotone sequence
    cuts = [edge_own]
    for e in (edge_adjacent, edge_closed, edge_far, edge_zero):
        cuts.append(max(e, cuts[-1]))

    def solve(index: int) -> Interval:
        r = rho / R
        if index == 0:
            return Interval(r, 1.0 - r)
        if index == 1:
            lo, hi = max(0.0, 1.0 - r), min(1.0, r)
            if hi <= lo:
                return Interval.point(0.5 * (lo + hi))
            root = bisect(lambda b: _own_edge_root(b, rho, q1, q2, R),
                          lo, hi, tol_x=tol)
            return Interval.point(root)
        if index == 2:
            root = bisect(lambda b: _adjacent_edge_root(b, rho, q1, q2, R),
                          max(0.0, 1.0 - r), 1.0, tol_x=tol)
            return Interval.point(root)
        if index == 3:
            closed = 1.0 - rho * (q1 + q2) / (R * math.sqrt(2.0 * (q1 * q1 + q2 * q2)))
            return Interval.point(min(max(closed, 0.0), 1.0))
        if index == 4:
            root = bisect(lambda b: _far_corner_root(b, rho, q1, q2, R),
                          0.0, 1.0, tol_x=tol)
            return Interval.point(root)
        return Interval.point(0.0)

    selected = 0
    while selected < len(cuts) and rho >= cuts[selected]:
        selected += 1
    candidates = {selected}
    for i, cut in enumerate(cuts):
        if abs(rho - cut) < _BREAKPOINT_SNAP * R:
            candidates.update((i, i + 1))

    best = None
    best_p = -1.0
    for index in sorted(candidates):
        found = solve(index)
        p = success_prob_2d(found.midpoint, rho, mu, R)
        if p > best_p + 1e-15:
            best, best_p = found, p
    return best


class LoadRegime(enum.Enum):
    LOW = "low"
    HIGH = "high"


def asymptotic_beta_success_2d(rho: float, regime, R: float) -> Interval:
    """Limiting optimal displacement factor for vanishing or saturating
    load, as a function of the coverage radius."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    regime = LoadRegime(regime)
    r = rho / R
    if r < 0.5:
        return Interval(r, 1.0 - r)
    if regime is LoadRegime.LOW:
        if r < SQRT2 / 2.0:
            return Interval.point(0.5)
        if r < SQRT2:
            return Interval.point(1.0 - r / SQRT2)
        return Interval.point(0.0)
    if r < 1.0:
        return Interval.point(1.0 - r)
    return Interval.point(0.0)
