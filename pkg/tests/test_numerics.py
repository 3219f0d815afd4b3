import math

import numpy as np
import pytest
from scipy import stats

from uavdeploy.numerics import (
    Bracket,
    Interval,
    MaxIterExceeded,
    NonConvergent,
    NoSignChange,
    bisect,
    golden_max,
    poisson_pmf_log,
    poisson_quantile_upper,
    quad_1d,
    quad_2d,
)

# Library of integrands with known antiderivatives, used both for value
# checks and for confirming the error estimate is conservative.
INTEGRANDS_1D = [
    (lambda x: x ** 2, 0.0, 3.0, 9.0),
    (lambda x: np.sin(x), 0.0, math.pi, 2.0),
    (lambda x: np.exp(-x), 0.0, 5.0, 1.0 - math.exp(-5.0)),
    (lambda x: 1.0 / (1.0 + x ** 2), -1.0, 1.0, math.pi / 2.0),
    (lambda x: np.log1p(x ** 2), 0.0, 1.0, math.log(2.0) - 2.0 + math.pi / 2.0),
    (lambda x: np.sqrt(np.abs(x)), 0.0, 4.0, 16.0 / 3.0),
    (lambda x: np.cos(10.0 * x), 0.0, 1.0, math.sin(10.0) / 10.0),
    (lambda x: x * np.exp(x), 0.0, 2.0, math.exp(2.0) + 1.0),
    (lambda x: 1.0 / np.sqrt(x + 0.01), 0.0, 1.0, 2.0 * (math.sqrt(1.01) - 0.1)),
    (lambda x: np.log(1.0 + 2e7 / (x ** 2 + 1e4)),
     0.0, 1000.0,
     # closed form of the throughput-style kernel integral, a=2e7, h^2=1e4
     1000.0 * math.log(1.0 + 2e7 / (1e6 + 1e4))
     + 2.0 * math.sqrt(2e7 + 1e4) * math.atan(1000.0 / math.sqrt(2e7 + 1e4))
     - 2.0 * 100.0 * math.atan(1000.0 / 100.0)),
]


@pytest.mark.parametrize("f,a,b,exact", INTEGRANDS_1D)
def test_quad_1d_values_and_conservative_errors(f, a, b, exact):
    res = quad_1d(f, a, b, rel_tol=1e-10)
    assert res.value == pytest.approx(exact, rel=1e-9, abs=1e-12)
    true_err = abs(res.value - exact)
    assert true_err <= 3.0 * max(res.error_estimate, 1e-15)


def test_quad_1d_empty_and_reversed():
    assert quad_1d(lambda x: x, 1.0, 1.0).value == 0.0
    res = quad_1d(lambda x: np.ones_like(x), 1.0, 0.0)
    assert res.value == pytest.approx(-1.0)


def test_quad_1d_nonconvergent_carries_partial():
    # step discontinuity keeps the K-G discrepancy alive near the jump
    f = lambda x: np.where(x < math.pi / 10.0, 1.0, 0.0)
    with pytest.raises(NonConvergent) as exc:
        quad_1d(f, 0.0, 1.0, rel_tol=1e-15, max_subdivisions=8)
    assert exc.value.value == pytest.approx(math.pi / 10.0, rel=1e-3)
    assert exc.value.error_estimate > 0


INTEGRANDS_2D = [
    (lambda x, y: x * y, 0.0, 2.0, 0.0, 3.0, 9.0),
    (lambda x, y: np.sin(x) * np.cos(y), 0.0, math.pi, 0.0, math.pi / 2.0, 2.0),
    (lambda x, y: np.exp(-(x + y)), 0.0, 1.0, 0.0, 1.0, (1.0 - math.exp(-1.0)) ** 2),
    (lambda x, y: 1.0 / (1.0 + x ** 2 + y ** 2) ** 2,
     -30.0, 30.0, -30.0, 30.0, None),  # value checked against scipy below
]


@pytest.mark.parametrize("f,x0,x1,y0,y1,exact", INTEGRANDS_2D)
def test_quad_2d_values(f, x0, x1, y0, y1, exact):
    res = quad_2d(f, x0, x1, y0, y1, rel_tol=1e-9)
    if exact is None:
        from scipy.integrate import dblquad
        exact, _ = dblquad(lambda y, x: f(np.asarray(x), np.asarray(y)),
                           x0, x1, y0, y1, epsabs=1e-11, epsrel=1e-11)
    assert res.value == pytest.approx(exact, rel=1e-7)
    assert abs(res.value - exact) <= 3.0 * max(res.error_estimate, 1e-13)


def test_quad_2d_throughput_kernel():
    # the actual 2D workload shape: log2(1 + a/(dist^2 + h^2)) over a square
    a, h2 = 1.99526e7, 1e4
    f = lambda x, y: np.log2(1.0 + a / ((x - 300.0) ** 2 + (y - 300.0) ** 2 + h2))
    res = quad_2d(f, 0.0, 1000.0, 0.0, 1000.0, rel_tol=1e-9)
    from scipy.integrate import dblquad
    exact, _ = dblquad(lambda y, x: math.log2(1.0 + a / ((x - 300.0) ** 2 + (y - 300.0) ** 2 + h2)),
                       0.0, 1000.0, 0.0, 1000.0, epsabs=1e-6, epsrel=1e-10)
    assert res.value == pytest.approx(exact, rel=1e-8)


def test_bisect_basic_and_endpoint_roots():
    assert bisect(lambda x: x - 1.25, 0.0, 2.0, tol_x=1e-12) == pytest.approx(1.25, abs=1e-12)
    assert bisect(lambda x: x, 0.0, 1.0) == 0.0
    assert bisect(lambda x: x - 1.0, 0.0, 1.0) == 1.0
    # root exactly at upper endpoint with interior sign constancy
    assert bisect(lambda x: -((x - 1.0) ** 3), 0.5, 1.0) == pytest.approx(1.0, abs=1e-6)


def test_bisect_accepts_bracket():
    f = lambda x: x * x - 2.0
    br = Bracket.evaluate(f, 1.0, 2.0)
    assert br.f_lo < 0 < br.f_hi
    assert bisect(f, br, tol_x=1e-12) == pytest.approx(math.sqrt(2.0), abs=1e-11)
    with pytest.raises(ValueError):
        Bracket(2.0, 1.0, -1.0, 1.0)


def test_bisect_no_sign_change():
    with pytest.raises(NoSignChange):
        bisect(lambda x: x * x + 1.0, -1.0, 1.0)


def test_bisect_iteration_cap():
    with pytest.raises(MaxIterExceeded):
        bisect(lambda x: x - 0.3, 0.0, 1.0, tol_x=1e-12, max_iter=5)


def test_golden_max_quadratic():
    res = golden_max(lambda x: -(x - 0.37) ** 2, 0.0, 1.0, tol_x=1e-10)
    assert res.x == pytest.approx(0.37, abs=1e-8)
    assert not res.flat


def test_golden_max_piecewise_linear_peak():
    res = golden_max(lambda x: min(x, 0.5 - x) , 0.0, 0.5, tol_x=1e-10)
    assert res.x == pytest.approx(0.25, abs=1e-8)


def test_golden_max_flat_function_reports_plateau():
    res = golden_max(lambda x: 1.0, 0.0, 1.0, tol_x=1e-9)
    assert res.flat
    assert 0.0 <= res.x <= 1.0
    assert res.bracket.lo == pytest.approx(0.0, abs=1e-6)
    assert res.bracket.hi == pytest.approx(1.0, abs=1e-6)


def test_golden_max_trapezoid_plateau_edges():
    f = lambda x: min(x, 0.3, 1.0 - x) * 10.0
    res = golden_max(f, 0.0, 1.0, tol_x=1e-10)
    assert res.flat
    assert res.bracket.lo == pytest.approx(0.3, abs=1e-4)
    assert res.bracket.hi == pytest.approx(0.7, abs=1e-4)
    assert res.bracket.contains(res.x)


def test_interval():
    iv = Interval(0.2, 0.8)
    assert iv.midpoint == pytest.approx(0.5)
    assert iv.contains(0.2) and iv.contains(0.8) and not iv.contains(0.81)
    assert iv.contains(0.81, tol=0.02)
    assert Interval.point(0.3).is_point
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)


@pytest.mark.parametrize("mu", [0.01, 0.5, 1.0, 4.0, 50.0, 1000.0])
def test_poisson_pmf_log_sums_to_one(mu):
    kmax = int(mu + 40.0 * math.sqrt(mu) + 40.0)
    total = np.exp(poisson_pmf_log(np.arange(kmax + 1), mu)).sum()
    assert total == pytest.approx(1.0, abs=1e-12)


def test_poisson_pmf_log_matches_scipy():
    k = np.arange(0, 300)
    got = poisson_pmf_log(k, 80.0)
    ref = stats.poisson.logpmf(k, 80.0)
    assert np.allclose(got, ref, atol=1e-10)


@pytest.mark.parametrize("mu,tail", [(1.0, 1e-12), (0.001, 1e-12), (4.0, 1e-9),
                                     (50.0, 1e-12), (500.0, 1e-12)])
def test_poisson_quantile_upper_is_smallest(mu, tail):
    k = poisson_quantile_upper(mu, tail)
    # oracle: direct pmf summation for the survival function
    ks = np.arange(0, max(3 * k + 10, 50))
    pmf = np.exp(poisson_pmf_log(ks, mu))
    sf_k = pmf[k + 1:].sum()
    assert sf_k < tail
    if k > 0:
        sf_km1 = pmf[k:].sum()
        assert sf_km1 >= tail


def test_poisson_quantile_upper_small_mu_example():
    assert poisson_quantile_upper(1.0, 1e-12) <= 20
