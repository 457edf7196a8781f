"""Special-function suite: external oracles, brute-force cross-checks, bounds.

scipy.special.jv and mpmath.zeta serve as oracles only; no production code
path touches them.  The Kloosterman checks re-derive every sum through a
separate cmath route so an indexing bug cannot cancel itself out.
"""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
import mpmath
from hypothesis import given, settings, strategies as st
from scipy.special import jv

from heckemass.arith import euler_phi, tau_divisors
from heckemass.specfun import (
    bessel_j,
    bessel_j_many,
    bessel_decay_bound,
    bessel_landau_bound,
    kloosterman,
    kloosterman_table,
    kloosterman_weil_bound,
    riemann_zeta,
    lambda_k,
    WeightFnParams,
    weight_w,
    weight_w_many,
    _bessel_series,
    _bessel_integral,
    _w_integrand_log_magnitude,
)


# ---------------------------------------------------------------------------
# Bessel


def test_bessel_trivial_values():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(11, 0.0) == 0.0


def test_bessel_j1_at_1_against_series_oracle():
    # independent oracle: 20 exact-rational series terms for J_1(1)
    acc = Fraction(0)
    for t in range(21):
        acc += Fraction((-1) ** t, 4 ** t * math.factorial(t) * math.factorial(t + 1))
    ref = float(acc) / 2  # (x/2)^(1+2t) with x=1 gives the global 1/2
    assert abs(bessel_j(1, 1.0) - ref) < 1e-13
    assert abs(ref - 0.4400505857449335) < 1e-15


def test_bessel_against_scipy_grid():
    for nu in [0, 1, 2, 5, 11, 13, 21, 25, 41, 121, 997]:
        for x in [1e-6, 0.5, 3.0, 11.9, 12.0, 12.1, 55.5, 151.0, 999.5, 1e4]:
            assert abs(bessel_j(nu, x) - float(jv(nu, x))) < 1e-12, (nu, x)


def test_bessel_route_seam_agreement():
    # both evaluation routes are valid on an overlap window; they must agree
    for nu in [0, 3, 11, 25]:
        for x in [6.0, 9.0, 11.5, 12.0]:
            assert abs(_bessel_series(nu, x) - _bessel_integral(nu, x)) < 1e-12


def test_bessel_rejections():
    with pytest.raises(ValueError):
        bessel_j(11, -1.0)
    with pytest.raises(ValueError):
        bessel_j(-1, 1.0)
    with pytest.raises(ValueError):
        bessel_j(10 ** 4 + 1, 1.0)
    with pytest.raises(ValueError):
        bessel_j(3, 1e8)


def test_bessel_batch_matches_scalar():
    rng = np.random.default_rng(11)
    for nu in [0, 1, 5, 11, 21, 41]:
        seam = max(12.0, nu / 3.0)
        xs = np.concatenate([
            rng.uniform(0.0, 3.0, 25),
            rng.uniform(3.0, 30.0, 25),
            rng.uniform(30.0, 1500.0, 25),
            [0.0, seam, seam + 1e-9],
        ])
        got = bessel_j_many(nu, xs)
        ref = np.array([bessel_j(nu, float(x)) for x in xs])
        assert float(np.abs(got - ref).max()) < 1e-12


def test_bessel_batch_edge_shapes():
    assert bessel_j_many(3, []).shape == (0,)
    assert bessel_j_many(0, [0.0])[0] == 1.0
    with pytest.raises(ValueError):
        bessel_j_many(3, [[1.0, 2.0]])
    with pytest.raises(ValueError):
        bessel_j_many(3, [-1.0])
    with pytest.raises(ValueError):
        bessel_j_many(-1, [1.0])


@settings(deadline=None, max_examples=60)
@given(st.integers(min_value=5, max_value=200), st.floats(min_value=1.0, max_value=1e4))
def test_bessel_landau_bound_holds(nu, x):
    assert abs(bessel_j(nu, x)) <= bessel_landau_bound(nu, x)


@settings(deadline=None, max_examples=60)
@given(st.integers(min_value=1, max_value=120), st.floats(min_value=1e-3, max_value=1.0))
def test_bessel_small_argument_bound(nu, frac):
    x = frac * 2 * math.sqrt(nu)
    assert abs(bessel_j(nu, x)) <= math.exp(
        nu * math.log(x / 2) - math.lgamma(nu + 1)
    ) * (1 + 1e-12) + 1e-300


@settings(deadline=None, max_examples=40)
@given(st.integers(min_value=1, max_value=80), st.floats(min_value=1e-3, max_value=1.0))
def test_bessel_decay_bound_dominates(nu, frac):
    x = frac * 1.9 * math.sqrt(nu + 1)
    assert abs(bessel_j(nu, x)) <= bessel_decay_bound(nu, x) * (1 + 1e-12) + 1e-300


# ---------------------------------------------------------------------------
# Kloosterman


def _brute_kloosterman(m, n, c):
    if c == 1:
        return 1.0
    tot = 0j
    for d in range(1, c):
        if math.gcd(d, c) == 1:
            tot += cmath.exp(2j * math.pi * (m * d + n * pow(d, -1, c)) / c)
    assert abs(tot.imag) < 1e-9
    return tot.real


def test_kloosterman_fixed_values():
    assert kloosterman(1, 1, 1) == 1.0
    assert abs(kloosterman(1, 1, 3) - (-1.0)) < 1e-12
    for c in (2, 3, 4, 6, 9, 12, 30, 97):
        assert abs(kloosterman(0, 0, c) - euler_phi(c)) < 1e-9


def test_kloosterman_against_brute_force():
    for (m, n, c) in [(1, 1, 5), (2, 3, 7), (1, 4, 12), (3, 3, 13),
                      (0, 2, 9), (5, 7, 360), (1, 1, 101), (-1, 2, 15)]:
        assert abs(kloosterman(m, n, c) - _brute_kloosterman(m, n, c)) < 1e-8


def test_kloosterman_rejections():
    with pytest.raises(ValueError):
        kloosterman(1, 1, 0)
    with pytest.raises(ValueError):
        kloosterman(1, 1, 10 ** 6 + 1)


def test_kloosterman_table_matches_scalar():
    ms, ns = [1, 2, 3, 7, 12], [1, 2, 5, 11]
    for c in (2, 3, 5, 12, 36, 97, 256):
        tab = kloosterman_table(ms, ns, c)
        for i, m in enumerate(ms):
            for j, n in enumerate(ns):
                assert abs(tab[i, j] - kloosterman(m, n, c)) < 1e-8, (m, n, c)


@settings(deadline=None, max_examples=80)
@given(st.integers(min_value=0, max_value=20), st.integers(min_value=0, max_value=20),
       st.integers(min_value=1, max_value=500))
def test_kloosterman_symmetry_and_weil(m, n, c):
    s1 = kloosterman(m, n, c)
    assert abs(s1 - kloosterman(n, m, c)) < 1e-8
    assert abs(s1) <= kloosterman_weil_bound(m, n, c) + 1e-8


def test_twisted_sum_bound_brute_force():
    # |sum over units d mod c of e(dr/c) * S(n*d, +-m2; c/m1)| <= c tau(c) gcd(c,n)
    for c in range(1, 61):
        divisors_c = [m1 for m1 in range(1, c + 1) if c % m1 == 0]
        for m1 in divisors_c:
            cm = c // m1
            for (r, n, m2, sign) in [(1, 1, 1, 1), (2, 1, 4, -1), (1, 2, 1, 1),
                                     (5, 3, 4, -1), (2, 2, 1, -1)]:
                tot = 0j
                for d in range(1, c + 1):
                    if math.gcd(d, c) != 1:
                        continue
                    tot += cmath.exp(2j * math.pi * r * d / c) * _brute_kloosterman(
                        (n * d) % max(cm, 1), (sign * m2) % max(cm, 1), cm
                    )
                bound = c * tau_divisors(c) * math.gcd(c, n)
                assert abs(tot) <= bound + 1e-6, (c, m1, r, n, m2, sign)


# ---------------------------------------------------------------------------
# zeta


def test_zeta_classical_values():
    assert abs(riemann_zeta(2) - math.pi ** 2 / 6) < 1e-13
    assert abs(riemann_zeta(4) - math.pi ** 4 / 90) < 1e-13
    assert abs(riemann_zeta(3) - 1.2020569031595943) < 1e-13


def test_zeta_against_mpmath():
    for s in [1.5, 2.5 + 3j, 0.5 + 14.134j, -0.5, -1.9, 1.001, 6 + 40j, 0.01]:
        assert abs(riemann_zeta(s) - complex(mpmath.zeta(s))) < 1e-12, s


def test_zeta_rejections():
    with pytest.raises(ValueError):
        riemann_zeta(1.0 + 1e-9j)
    with pytest.raises(ValueError):
        riemann_zeta(-2.5)


# ---------------------------------------------------------------------------
# gamma factor and weight function


def test_lambda_k_ratio_identity():
    assert abs(cmath.exp(lambda_k(0.5, 11) - lambda_k(0.5, 11)) - 1) < 1e-15


def test_lambda_k_magnitude_decreases_off_axis():
    base = lambda_k(0.5, 11).real
    for t in (1.0, 5.0):
        assert lambda_k(0.5 + 1j * t, 11).real <= base


def test_lambda_k_finite_and_poles():
    val = lambda_k(0.5, 11)
    assert math.isfinite(val.real)
    with pytest.raises(ValueError):
        lambda_k(-0.5, 0)  # makes the s + 1/2 argument hit 0


def test_weight_params_validation():
    with pytest.raises(AssertionError):
        WeightFnParams(k=11, a=0.5)
    p = WeightFnParams(k=11)
    assert p.contour_height > 0
    # the computed height really does crush the integrand by 1e16
    drop = _w_integrand_log_magnitude(11, 8.0, 1.0, p.contour_height) - \
        _w_integrand_log_magnitude(11, 8.0, 1.0, 0.0)
    assert drop < math.log(1e-16) + 1e-9


def test_weight_contour_independence():
    p = WeightFnParams(k=11)
    for x in (0.1, 1.0, 121.0, 1210.0):
        w1 = weight_w(x, p, sigma=1.0)
        w2 = weight_w(x, p, sigma=2.0)
        assert abs(w1.value - w2.value) < 1e-6, x
        assert not w1.flagged


def test_weight_limits():
    p = WeightFnParams(k=11)
    assert abs(weight_w(1e-8, p).value - 1.0) < 1e-6
    assert abs(weight_w(1e6 * 121, p).value) < 1e-8
    assert weight_w(0.01, p).value > weight_w(1e8, p).value


def test_weight_many_matches_scalar():
    p = WeightFnParams(k=13, a=12.0)
    xs = [0.5, 2.0, 50.0, 700.0]
    vals, errs = weight_w_many(xs, p)
    for x, v in zip(xs, vals):
        assert abs(v - weight_w(x, p).value) < 1e-14
    assert np.all(errs < 1e-8)


def test_weight_rejects_nonpositive():
    p = WeightFnParams(k=11)
    with pytest.raises(AssertionError):
        weight_w(0.0, p)
