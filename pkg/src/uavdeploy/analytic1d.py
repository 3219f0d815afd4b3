"""Closed-form performance of the majority-vote UAV placement in a 1D cell.

Covers the displacement probabilities, the average-throughput expansion and
its optimal displacement factor, the piecewise success probability with its
optimal (sometimes set-valued) displacement factor, and the per-realization
optimal factor used by the exact-user-number scheme.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .model import SystemParams
from .numerics import Interval, bisect

LN2 = math.log(2.0)

# beyond this many Poisson terms something is off with the requested load
K_HARD_CAP = 2_000_000


@dataclass(frozen=True)
class DisplacementProbs:
    """Joint probabilities q[j] = P[UAV at anchor j and typical user in S1],
    conditioned on at least one user in the cell."""

    q: tuple
    mu: float
    truncation_error_bound: float

    @property
    def q0(self) -> float:
        return self.q[0]

    @property
    def q1(self) -> float:
        return self.q[1]

    @property
    def q2(self) -> float:
        return self.q[2]


_cache_lock = threading.Lock()


@lru_cache(maxsize=512)
def _displacement_probs_1d_cached(mu: float, tol: float):
    # conditional tail dropped from the K-sum stays below tol: truncate the
    # unconditional tail at tol * P[k >= 1]
    kept_mass = -math.expm1(-mu)
    k_max = stats.poisson.isf(min(tol * kept_mass, 0.5), mu)
    k_max = int(k_max) + 3 if math.isfinite(k_max) else K_HARD_CAP
    if k_max > K_HARD_CAP:
        raise ValueError(f"mu={mu:g} needs more than {K_HARD_CAP} Poisson terms")
    K = np.arange(1, k_max + 1, dtype=float)
    log_w = K * math.log(mu) - mu - gammaln(K + 1.0) - math.log(kept_mass)
    w = np.exp(log_w)

    # P[U=U1 | typical in S1, k=K]: the half-row binomial sums collapse to
    # 1/2 plus/minus a central binomial coefficient, computed in log space
    odd = (K.astype(np.int64) % 2) == 1
    a_term = np.full_like(K, 0.5)
    b_term = np.full_like(K, 0.5)
    Ko = K[odd]
    central_odd = np.exp(gammaln(Ko) - 2.0 * gammaln(0.5 * (Ko - 1.0) + 1.0)
                         - Ko * LN2)
    a_term[odd] += central_odd
    b_term[odd] -= central_odd
    Ke = K[~odd]
    central_even = np.exp(gammaln(Ke + 1.0) - 2.0 * gammaln(0.5 * Ke + 1.0)
                          - Ke * LN2)
    b_term[~odd] -= central_even

    q1 = 0.5 * float(w @ a_term)
    q2 = 0.5 * float(w @ b_term)
    q0 = 0.5 - q1 - q2
    bound = float(stats.poisson.sf(k_max, mu)) / kept_mass
    return (q0, q1, q2), bound


def displacement_probs_1d(mu: float, tol: float = 1e-12) -> DisplacementProbs:
    """Displacement probabilities (q0, q1, q2) for mean cell load mu.

    The infinite load-sum is truncated once the dropped conditional Poisson
    mass falls below tol; the realized bound is recorded on the result.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    with _cache_lock:
        q, bound = _displacement_probs_1d_cached(float(mu), float(tol))
    return DisplacementProbs(q=q, mu=mu, truncation_error_bound=bound)


@dataclass(frozen=True)
class ThroughputTerms:
    """The four per-anchor throughput building blocks, in bit/s/Hz.

    The typical user's sector average throughput is zeta+kappa_term when the
    UAV displaces toward it, xi-kappa_term when it displaces away, and
    vartheta when the UAV stays centered.
    """

    zeta: float
    kappa_term: float
    xi: float
    vartheta: float
    beta: float


def _kernel_primitive(u: float, a: float, h: float) -> float:
    """Antiderivative at u of ln(1 + a/(t^2 + h^2)), natural log."""
    c = math.sqrt(a + h * h)
    return (u * math.log1p(a / (u * u + h * h))
            + 2.0 * c * math.atan(u / c) - 2.0 * h * math.atan(u / h))


def throughput_terms(beta: float, params: SystemParams, R: float) -> ThroughputTerms:
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    a = params.link_budget_a
    h = params.altitude_h
    zeta = _kernel_primitive((1.0 - beta) * R, a, h) / (R * LN2)
    kappa = _kernel_primitive(beta * R, a, h) / (R * LN2)
    xi = _kernel_primitive((1.0 + beta) * R, a, h) / (R * LN2)
    vartheta = _kernel_primitive(R, a, h) / (R * LN2)
    return ThroughputTerms(zeta=zeta, kappa_term=kappa, xi=xi,
                           vartheta=vartheta, beta=beta)


def avg_throughput_1d(beta: float, mu: float, params: SystemParams, R: float,
                      tol: float = 1e-12) -> float:
    """Average typical-user throughput under majority-vote displacement beta."""
    dp = displacement_probs_1d(mu, tol)
    t = throughput_terms(beta, params, R)
    return 2.0 * (dp.q1 * t.zeta + (dp.q1 - dp.q2) * t.kappa_term
                  + dp.q2 * t.xi + dp.q0 * t.vartheta)


def _log_snr_gain(beta: float, shift: float, a: float, h: float, R: float) -> float:
    """ln of (1 + SNR at the near anchor) over (1 + SNR at distance |beta+shift|R)."""
    near = 1.0 + a / (h * h + beta * beta * R * R)
    far = 1.0 + a / (h * h + (beta + shift) ** 2 * R * R)
    return math.log(near / far)


def throughput_gradient_residual_1d(beta: float, q1: float, q2: float,
                                    params: SystemParams, R: float) -> float:
    """Stationarity residual of the average throughput in beta.

    Positive while displacing further still helps the majority side more
    than it hurts the minority side.
    """
    a = params.link_budget_a
    h = params.altitude_h
    rho1 = _log_snr_gain(beta, -1.0, a, h, R)
    rho2 = _log_snr_gain(beta, 1.0, a, h, R)
    return q1 * rho1 - q2 * rho2


def optimal_beta_throughput_1d(mu: float, params: SystemParams, R: float,
                               tol: float = 1e-9) -> float:
    """Throughput-optimal displacement factor; unique root in [0, 0.5]."""
    dp = displacement_probs_1d(mu)
    f = lambda b: throughput_gradient_residual_1d(b, dp.q1, dp.q2, params, R)
    root = bisect(f, 0.0, 0.5, tol_x=1e-13)
    if abs(f(root)) > tol:
        raise RuntimeError(f"stationarity residual {f(root):g} above tol at beta={root:g}")
    return root


def success_prob_1d(beta: float, rho: float, mu: float, R: float,
                    tol: float = 1e-12) -> float:
    """Probability the typical user falls in the UAV's coverage interval.

    Valid on 0 < rho < R; callers treat rho >= R as certain success and an
    unreachable SNR threshold as certain failure.
    """
    if not 0.0 < rho < R:
        raise ValueError("rho must lie strictly between 0 and R")
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must lie in [0, 1]")
    dp = displacement_probs_1d(mu, tol)
    q0, q1, q2 = dp.q
    r = rho / R
    if r <= 0.5:
        if beta <= r:
            return r + 2.0 * beta * (q1 - q2)
        if beta <= 1.0 - r:
            return 4.0 * r * q1 + 2.0 * r * q0
        return 2.0 * ((1.0 - beta + r) * q1 + r * q0)
    if beta <= 1.0 - r:
        return r + 2.0 * beta * (q1 - q2)
    if beta <= r:
        return 2.0 * (q1 + (r - beta) * q2 + r * q0)
    return 2.0 * ((1.0 - beta + r) * q1 + r * q0)


def optimal_beta_success_1d(rho: float, R: float) -> Interval:
    """Optimal displacement factor(s) for coverage; an interval when the
    coverage radius is small enough to make the optimum non-unique."""
    if not 0.0 < rho < R:
        raise ValueError("rho must lie strictly between 0 and R")
    r = rho / R
    if r <= 0.5:
        return Interval(r, 1.0 - r)
    return Interval.point(1.0 - r)


def exact_number_beta_1d(K1: int, K2: int, params: SystemParams, R: float,
                         tol: float = 1e-9) -> float:
    """Per-realization optimal displacement factor given the sector counts.

    Equal counts keep the UAV centered (factor 0); otherwise the factor is
    the stationary point with the majority count weighting the near-side
    gain, in [0, 0.5].
    """
    if K1 < 0 or K2 < 0 or K1 + K2 < 1:
        raise ValueError("need nonnegative counts with K1 + K2 >= 1")
    if K1 == K2:
        return 0.0
    k_major, k_minor = (K1, K2) if K1 > K2 else (K2, K1)
    f = lambda b: throughput_gradient_residual_1d(b, float(k_major), float(k_minor),
                                                  params, R)
    root = bisect(f, 0.0, 0.5, tol_x=min(tol, 1e-9) * 1e-2)
    return root
