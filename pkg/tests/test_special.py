import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risnoma.special import (
    DomainError,
    exp_e1_scaled,
    exp_integral_e1,
    exp_integral_ei,
    exp_upper_inc_gamma_neg1_scaled,
    log_reg_upper_inc_gamma,
    reg_inc_gamma,
    upper_inc_gamma_neg1,
)

from _oracles import _quad_e1, _quad_gamma_neg1, _quad_lower, _quad_upper, _rel


# --- examples --------------------------------------------------------------

def test_reg_inc_gamma_exponential_median():
    p, q = reg_inc_gamma(1.0, math.log(2.0))
    assert p == pytest.approx(0.5, abs=1e-15)
    assert q == pytest.approx(0.5, abs=1e-15)


def test_reg_inc_gamma_integer_shape():
    p, _ = reg_inc_gamma(2.0, 1.0)
    assert p == pytest.approx(1 - 2 * math.exp(-1), rel=1e-14)


def test_reg_inc_gamma_quadrature_example():
    p, _ = reg_inc_gamma(3.5, 2.0)
    assert _rel(p, _quad_lower(3.5, 2.0)) <= 1e-10


def test_ei_minus_one():
    assert exp_integral_ei(-1.0) == pytest.approx(-0.21938393439552029, rel=1e-14)
    assert _rel(exp_integral_ei(-1.0), -_quad_e1(1.0)) <= 1e-12


def test_ei_minus_infinity():
    assert exp_integral_ei(-math.inf) == 0.0
    assert exp_integral_ei(-800.0) == 0.0


def test_ei_identity_small_argument():
    # E1(0.1) from its continued fraction, evaluated independently at high precision
    def e1_cf(y, depth=400):
        y = mp.mpf(y)
        tail = mp.mpf(0)
        for n in range(depth, 0, -1):
            tail = n / (1 + n / (y + tail))
        return mp.exp(-y) / (y + tail)

    assert _rel(exp_integral_ei(-0.1), -e1_cf(0.1)) <= 1e-10


def test_gamma_neg1_at_one():
    assert upper_inc_gamma_neg1(1.0) == pytest.approx(math.exp(-1) - 0.21938393439552029, rel=1e-13)
    assert upper_inc_gamma_neg1(1.0) == pytest.approx(0.148495506775922, rel=1e-12)


def test_gamma_neg1_recurrence_residual():
    for x in np.geomspace(0.01, 50.0, 60):
        g0 = exp_integral_e1(x)
        resid = abs(g0 + upper_inc_gamma_neg1(x) - math.exp(-x) / x)
        assert resid <= 1e-12 * math.exp(-x) / x


def test_gamma_neg1_asymptotic_order():
    x = 20.0
    assert upper_inc_gamma_neg1(x) == pytest.approx(math.exp(-x) / x ** 2, rel=0.10)


# --- domain errors ---------------------------------------------------------

@pytest.mark.parametrize("k,x", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5), (math.nan, 1.0), (1.0, math.inf)])
def test_reg_inc_gamma_domain(k, x):
    with pytest.raises(DomainError):
        reg_inc_gamma(k, x)


@pytest.mark.parametrize("x", [0.0, 1.0, math.nan])
def test_ei_domain(x):
    with pytest.raises(DomainError):
        exp_integral_ei(x)


@pytest.mark.parametrize("x", [0.0, -2.0, math.nan])
def test_gamma_neg1_domain(x):
    with pytest.raises(DomainError):
        upper_inc_gamma_neg1(x)


# --- quadrature oracle on log grids ----------------------------------------

_K_GRID = np.geomspace(0.2, 2000.0, 10)
_RATIO_GRID = np.geomspace(0.05, 5.0, 10)


@pytest.mark.parametrize("k", _K_GRID)
def test_reg_inc_gamma_matches_quadrature(k):
    worst = 0.0
    for r in _RATIO_GRID:
        x = k * r
        p, q = reg_inc_gamma(k, x)
        if x < k:
            ref = _quad_lower(k, x)
            if ref > 1e-300:  # below that P itself is subnormal in double precision
                worst = max(worst, _rel(p, ref))
        else:
            ref = _quad_upper(k, x)
            if ref > 1e-300:
                worst = max(worst, _rel(q, ref))
    assert worst <= 1e-10


def test_e1_and_gamma_neg1_match_quadrature():
    for y in np.geomspace(1e-3, 300.0, 100):
        assert _rel(exp_integral_ei(-y), -_quad_e1(y)) <= 1e-10
        assert _rel(upper_inc_gamma_neg1(y), _quad_gamma_neg1(y)) <= 1e-10


def test_scaled_forms_match_mpmath():
    for y in np.geomspace(1e-4, 1e6, 80):
        assert _rel(exp_e1_scaled(y), mp.exp(y) * mp.e1(y)) <= 1e-12
        assert _rel(exp_upper_inc_gamma_neg1_scaled(y), mp.exp(y) * mp.gammainc(-1, y)) <= 1e-11


def test_log_upper_where_q_underflows():
    k, x = 5.0, 900.0
    assert reg_inc_gamma(k, x)[1] == 0.0
    ref = mp.log(mp.gammainc(k, x, regularized=True))
    assert log_reg_upper_inc_gamma(k, x) == pytest.approx(float(ref), rel=1e-12)


def test_large_shape_accuracy_against_mpmath():
    for k in (37.0, 400.0, 1e4):
        for x in (1e-6, 0.3 * k, k, 1.7 * k, 1e6):
            p, q = reg_inc_gamma(k, x)
            ref_q = mp.gammainc(k, x, mp.inf, regularized=True)
            ref_p = 1 - ref_q if x > k else mp.gammainc(k, 0, x, regularized=True)
            if float(ref_p) > 1e-300 and x <= k:
                assert _rel(p, ref_p) <= 1e-12
            if float(ref_q) > 1e-300 and x >= k:
                assert _rel(q, ref_q) <= 1e-12


# --- properties ------------------------------------------------------------

shapes = st.floats(min_value=1e-3, max_value=1e4, allow_nan=False)
args = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(shapes, args)
def test_p_plus_q_is_one(k, x):
    p, q = reg_inc_gamma(k, x)
    assert 0.0 <= p <= 1.0 and 0.0 <= q <= 1.0
    assert abs(p + q - 1.0) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(shapes, args, args)
def test_p_nondecreasing(k, x1, x2):
    lo, hi = sorted((x1, x2))
    assert reg_inc_gamma(k, lo)[0] <= reg_inc_gamma(k, hi)[0] + 1e-15


def test_p_limits():
    for k in (0.5, 3.0, 100.0):
        assert reg_inc_gamma(k, 0.0) == (0.0, 1.0)
        assert reg_inc_gamma(k, 1e6)[0] == 1.0


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=600.0), st.floats(min_value=1e-6, max_value=600.0))
def test_gamma_neg1_positive_and_decreasing(x1, x2):
    lo, hi = sorted((x1, x2))
    glo, ghi = upper_inc_gamma_neg1(lo), upper_inc_gamma_neg1(hi)
    assert glo >= 0.0 and ghi >= 0.0
    if hi > lo * (1 + 1e-9) and ghi > 0.0:
        assert ghi < glo


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-8, max_value=700.0))
def test_ei_e1_consistency(y):
    assert exp_integral_ei(-y) == -exp_integral_e1(y)
    assert exp_e1_scaled(y) == pytest.approx(math.exp(y) * exp_integral_e1(y), rel=1e-13)
