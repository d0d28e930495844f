import math
from fractions import Fraction
from itertools import product

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import poisson

from ncbeta.errors import DegenerateParameter, InvalidParameter, OrderOutOfRange
from ncbeta.moments import (
    DNcBParams,
    Method,
    NcChiSqParams,
    beta_moment,
    dncb_mean_reduced,
    dncb_mean_weight,
    dncb_moment_double_series,
    dncb_moment_one_series,
    dncb_moment_sum,
    dncb_second_moment_reduced,
    identity_2f2_as_1f1_sum,
    mean_relationship_check,
    ncb1_moment,
    ncb1_moment_definitional,
    ncb2_moment,
    ncchisq_moment,
    ncchisq_moment_classic,
    ncchisq_moment_closed,
    ncchisq_moment_stirling,
    ncchisq_moment_zero_df,
    poisson_raw_moment,
)
from ncbeta.special import kummer_1f1

TABLE1 = {
    (2, 4): (6, 56, 688, 10368),
    (4.5, 2): (6.5, 59.25, 690.125, 9745.5625),
    (3, 1.5): (4.5, 32.25, 313.125, 3812.0625),
    (6, 3.5): (9.5, 116.25, 1730.375, 30228.0625),
}
TABLE2 = {
    (0.5, 0.5, 4, 4): (0.5, 0.33013, 0.24519, 0.19516),
    (0.5, 0.5, 4, 7): (0.38833, 0.21345, 0.13759, 0.09788),
    (1, 1, 2, 4): (0.40925, 0.23211, 0.15356, 0.11134),
    (2, 5, 0.5, 7): (0.21392, 0.06298, 0.02281, 0.00957),
}


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _mp_dncb_moments(a1, a2, l1, l2, orders, n=60):
    # independent oracle: Poisson-mixture double sum in 30-digit arithmetic
    with mpmath.workdps(30):
        m1, m2 = mpmath.mpf(l1) / 2, mpmath.mpf(l2) / 2
        p1 = [mpmath.exp(-m1) * m1**j / mpmath.factorial(j) for j in range(n)]
        p2 = [mpmath.exp(-m2) * m2**k / mpmath.factorial(k) for k in range(n)]
        out = []
        for r in orders:
            tot = mpmath.fsum(
                p1[j] * p2[k] * mpmath.rf(a1 + j, r) / mpmath.rf(a1 + a2 + j + k, r) for j in range(n) for k in range(n)
            )
            out.append(float(tot))
        return out


# --- parameter types ------------------------------------------------------------


def test_params_validation():
    with pytest.raises(InvalidParameter):
        NcChiSqParams(-1, 2)
    with pytest.raises(InvalidParameter):
        NcChiSqParams(1, math.nan)
    with pytest.raises(InvalidParameter):
        DNcBParams(0, 1, 1, 1)
    with pytest.raises(InvalidParameter):
        DNcBParams(1, 1, -1, 1)
    p = DNcBParams(1, 2, 3, 5)
    assert (p.alpha_plus, p.lambda_plus, p.theta1) == (3, 8, 3 / 8)
    assert NcChiSqParams(5, 1).h == 2.5
    with pytest.raises(DegenerateParameter):
        DNcBParams(1, 1).theta1


def test_order_cap():
    p = DNcBParams(1, 1, 1, 1)
    assert dncb_moment_sum(p, 32).value > 0
    for r in (0, 33, 1.5):
        with pytest.raises(OrderOutOfRange):
            dncb_moment_sum(p, r)
    with pytest.raises(OrderOutOfRange):
        ncchisq_moment_closed(NcChiSqParams(1, 1), 5)


# --- Beta and Poisson ----------------------------------------------------------


def test_beta_moment_examples():
    assert beta_moment(1, 1, 1) == 0.5
    assert beta_moment(2.5, 1.5, 1) == 2.5 / 4
    assert beta_moment(2, 3, 2) == pytest.approx(0.2, rel=1e-15)


def test_poisson_raw_moment_examples():
    assert poisson_raw_moment(1.7, 1) == 1.7
    assert poisson_raw_moment(1.7, 2) == pytest.approx(1.7 + 1.7**2, rel=1e-15)
    assert poisson_raw_moment(2.0, 3) == 22


@given(st.floats(0, 20), st.integers(0, 8))
def test_poisson_raw_moment_matches_sum(mu, i):
    k = np.arange(400)
    ref = math.fsum(poisson.pmf(k, mu) * k.astype(float) ** i)
    assert rel(poisson_raw_moment(mu, i), ref) < 1e-11


# --- Non-central chi-squared ------------------------------------------------------


@pytest.mark.parametrize("g,lam", list(TABLE1))
def test_table1_classic_and_stirling(g, lam):
    p = NcChiSqParams(g, lam)
    for r, want in enumerate(TABLE1[(g, lam)], start=1):
        assert rel(ncchisq_moment_classic(p, r).value, want) < 1e-12
        assert rel(ncchisq_moment_stirling(p, r).value, want) < 1e-12
        assert rel(ncchisq_moment_closed(p, r), want) < 1e-13


def test_ncchisq_examples():
    assert ncchisq_moment_stirling(NcChiSqParams(3, 1.5), 1).value == 4.5
    for g in (0.5, 3, 10):
        assert rel(ncchisq_moment_classic(NcChiSqParams(g, 0), 2).value, g * (g + 2)) < 1e-14
    assert ncchisq_moment_zero_df(2.7, 1).value == pytest.approx(2.7, rel=1e-15)
    assert ncchisq_moment_zero_df(4, 2).value == 32
    assert ncchisq_moment_zero_df(0, 3).value == 0
    lam = 1.3
    assert rel(ncchisq_moment_closed(NcChiSqParams(0, lam), 3), 24 * lam + 12 * lam**2 + lam**3) < 1e-14
    assert ncchisq_moment_classic(NcChiSqParams(2, 1), 1).method is Method.CLASSIC_SERIES_FREE
    assert ncchisq_moment_stirling(NcChiSqParams(2, 1), 1).method is Method.STIRLING_EXPANSION
    assert ncchisq_moment_zero_df(1, 1).method is Method.ZERO_DF


def test_ncchisq_formulas_need_positive_df():
    with pytest.raises(InvalidParameter):
        ncchisq_moment_classic(NcChiSqParams(0, 1), 1)
    with pytest.raises(InvalidParameter):
        ncchisq_moment_stirling(NcChiSqParams(0, 1), 1)
    assert ncchisq_moment(NcChiSqParams(0, 4), 2).value == 32


@pytest.mark.parametrize("g,lam", list(product((0.5, 1, 2, 3, 4.5, 6, 10), (0, 0.5, 1.5, 2, 3.5, 4, 20))))
def test_ncchisq_cross_formula_grid(g, lam):
    p = NcChiSqParams(g, lam)
    for r in range(1, 9):
        c = ncchisq_moment_classic(p, r).value
        assert rel(ncchisq_moment_stirling(p, r).value, c) <= 1e-12
        if r <= 4:
            assert rel(ncchisq_moment_closed(p, r), c) <= 1e-13


@pytest.mark.parametrize("lam", [0, 0.25, 1, 4, 17.5])
def test_zero_df_consistency(lam):
    for r in range(1, 5):
        assert ncchisq_moment_closed(NcChiSqParams(0, lam), r) == ncchisq_moment_zero_df(lam, r).value


@given(st.floats(0.05, 30), st.floats(0, 30), st.integers(1, 6))
@settings(max_examples=60)
def test_ncchisq_matches_mpmath_mixture(g, lam, r):
    # E[X^r] = sum_m Pois(m; lam/2) 2^r (g/2 + m)_r
    with mpmath.workdps(30):
        mu = mpmath.mpf(lam) / 2
        ref = mpmath.nsum(lambda m: mpmath.exp(-mu) * mu**m / mpmath.factorial(m) * 2**r * mpmath.rf(g / 2 + m, r), [0, mpmath.inf])
    assert rel(ncchisq_moment_stirling(NcChiSqParams(g, lam), r).value, float(ref)) < 1e-11


# --- DNcB --------------------------------------------------------------------------


@pytest.mark.parametrize("vec", list(TABLE2))
def test_table2_finite_sum(vec):
    p = DNcBParams(*vec)
    for r, want in enumerate(TABLE2[vec], start=1):
        assert abs(dncb_moment_sum(p, r).value - want) <= 1e-5 + 1e-12


@pytest.mark.parametrize("vec", list(TABLE2))
def test_dncb_formulas_agree(vec):
    p = DNcBParams(*vec)
    for r in range(1, 7):
        s = dncb_moment_sum(p, r)
        o = dncb_moment_one_series(p, r)
        d = dncb_moment_double_series(p, r)
        assert (s.method, o.method, d.method) == (Method.FINITE_SUM, Method.ONE_SERIES, Method.DOUBLE_SERIES)
        assert rel(s.value, o.value) <= 1e-9
        assert rel(s.value, d.value) <= 1e-9


@pytest.mark.parametrize("vec", [(0.5, 0.5, 4, 7), (2, 5, 0.5, 7), (3.5, 0.8, 11, 2.5)])
def test_dncb_matches_high_precision_oracle(vec):
    p = DNcBParams(*vec)
    for r, ref in zip((1, 3, 6), _mp_dncb_moments(*vec, (1, 3, 6))):
        assert rel(dncb_moment_sum(p, r).value, ref) < 1e-12


def test_dncb_published_examples_each_formula():
    assert dncb_moment_double_series(DNcBParams(0.5, 0.5, 4, 4), 1).value == pytest.approx(0.5, abs=1e-15)
    assert dncb_moment_double_series(DNcBParams(1, 1, 2, 4), 2).value == pytest.approx(0.23211, abs=1e-5)
    assert dncb_moment_one_series(DNcBParams(0.5, 0.5, 4, 7), 1).value == pytest.approx(0.38833, abs=1e-5)
    assert dncb_moment_one_series(DNcBParams(2, 5, 0.5, 7), 4).value == pytest.approx(0.00957, abs=1e-5)
    assert dncb_moment_sum(DNcBParams(0.5, 0.5, 4, 4), 3).value == pytest.approx(0.24519, abs=1e-5)
    assert dncb_moment_sum(DNcBParams(2, 5, 0.5, 7), 2).value == pytest.approx(0.06298, abs=1e-5)


def test_dncb_central_reduces_to_beta():
    for a1, a2, r in [(0.5, 0.5, 1), (2, 3, 2), (7, 1.5, 5)]:
        p = DNcBParams(a1, a2)
        b = beta_moment(a1, a2, r)
        assert dncb_moment_sum(p, r).value == pytest.approx(b, rel=1e-15)
        assert dncb_moment_one_series(p, r).value == pytest.approx(b, rel=1e-15)
        assert dncb_moment_double_series(p, r).value == pytest.approx(b, rel=1e-15)


def test_dncb_large_noncentrality_stays_finite():
    p = DNcBParams(1.5, 2.0, 1500.0, 1500.0)
    m = dncb_moment_sum(p, 2).value
    assert math.isfinite(m) and 0 < m < 1
    assert rel(m, dncb_moment_one_series(DNcBParams(1.5, 2.0, 1500.0, 1500.0), 2).value) < 1e-9


dncb_params = st.builds(
    DNcBParams,
    st.floats(0.05, 10),
    st.floats(0.05, 10),
    st.floats(0, 30),
    st.floats(0, 30),
)


@given(dncb_params)
@settings(max_examples=60, deadline=None)
def test_dncb_moments_decrease_in_order(p):
    vals = [dncb_moment_sum(p, r).value for r in range(1, 7)]
    assert all(0 < v < 1 for v in vals)
    assert all(u > v for u, v in zip(vals, vals[1:]))


@given(dncb_params, st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_dncb_sum_equals_double_series_property(p, r):
    assert rel(dncb_moment_sum(p, r).value, dncb_moment_double_series(p, r).value) < 1e-9


# --- reduced forms -----------------------------------------------------------------


def test_mean_reduced_examples():
    assert dncb_mean_reduced(DNcBParams(1.7, 1.7, 3, 3)) == pytest.approx(0.5, rel=1e-14)
    assert dncb_mean_reduced(DNcBParams(1, 1, 2, 4)) == pytest.approx(0.40925, abs=1e-5)
    assert dncb_mean_reduced(DNcBParams(2, 5, 0.5, 7)) == pytest.approx(0.21392, abs=1e-5)
    with pytest.raises(DegenerateParameter):
        dncb_mean_reduced(DNcBParams(1, 2))


@given(dncb_params.filter(lambda p: p.lambda_plus > 1e-3))
@settings(max_examples=60, deadline=None)
def test_mean_reduced_convexity(p):
    w = dncb_mean_weight(p)
    assert 0 < w <= 1
    m = dncb_mean_reduced(p)
    assert rel(m, dncb_moment_sum(p, 1).value) < 1e-12
    lo, hi = sorted((p.alpha1 / p.alpha_plus, p.lambda1 / p.lambda_plus))
    if hi - lo > 1e-6 and w < 1:
        assert lo < m < hi


def test_second_moment_reduced_examples():
    assert dncb_second_moment_reduced(DNcBParams(0.5, 0.5, 4, 7)) == pytest.approx(0.21345, abs=1e-5)
    assert dncb_second_moment_reduced(DNcBParams(1, 1, 2, 4)) == pytest.approx(0.23211, abs=1e-5)
    assert dncb_second_moment_reduced(DNcBParams(1, 1, 5e-9, 5e-9)) == pytest.approx(1 / 3, rel=1e-8)
    with pytest.raises(DegenerateParameter):
        dncb_second_moment_reduced(DNcBParams(1, 1))


@given(dncb_params.filter(lambda p: p.lambda_plus > 1e-3))
@settings(max_examples=60, deadline=None)
def test_second_moment_reduced_property(p):
    assert rel(dncb_second_moment_reduced(p), dncb_moment_sum(p, 2).value) < 1e-11


# --- NcB1, NcB2 and the 2F2 identity --------------------------------------------------


def test_ncb_examples():
    assert ncb1_moment(2, 3, 0, 2).value == pytest.approx(beta_moment(2, 3, 2), rel=1e-15)
    assert rel(ncb1_moment(2, 3, 1.0, 1).value, ncb1_moment_definitional(2, 3, 1.0, 1).value) < 1e-13
    assert ncb1_moment(0.5, 0.5, 8, 1).value == dncb_moment_sum(DNcBParams(0.5, 0.5, 8, 0), 1).value
    assert ncb1_moment_definitional(2, 3, 0, 2).value == pytest.approx(beta_moment(2, 3, 2), rel=1e-15)
    assert rel(ncb1_moment_definitional(1, 1, 2, 1).value, ncb1_moment(1, 1, 2, 1).value) < 1e-13
    assert rel(ncb1_moment_definitional(2, 3, 5, 3).value, ncb1_moment(2, 3, 5, 3).value) < 1e-10
    assert ncb2_moment(2, 3, 0, 2).value == pytest.approx(beta_moment(2, 3, 2), rel=1e-15)
    assert rel(ncb2_moment(0.5, 0.5, 4, 1).value, dncb_moment_sum(DNcBParams(0.5, 0.5, 0, 4), 1).value) < 1e-13
    direct = beta_moment(1, 2, 2) * math.exp(-1.5) * kummer_1f1(3, 5, 1.5)
    assert rel(ncb2_moment(1, 2, 3, 2).value, direct) < 1e-13


@given(st.floats(0.05, 10), st.floats(0.05, 10), st.floats(0, 40), st.integers(1, 8))
@settings(max_examples=60, deadline=None)
def test_reduction_laws(a1, a2, lam, r):
    s1 = dncb_moment_sum(DNcBParams(a1, a2, lam, 0), r).value
    assert rel(s1, ncb1_moment_definitional(a1, a2, lam, r).value) < 1e-10
    s2 = dncb_moment_sum(DNcBParams(a1, a2, 0, lam), r).value
    assert rel(s2, ncb2_moment(a1, a2, lam, r).value) < 1e-13
    assert rel(dncb_moment_one_series(DNcBParams(a1, a2, 0, lam), r).value, s2) < 1e-13


def test_identity_examples():
    lhs, rhs = identity_2f2_as_1f1_sum(0.7, 1.9, 3, 0.0)
    assert lhs == rhs == 1.0
    for args in ((1, 2, 1, 1.0), (0.5, 3, 4, 2.5)):
        lhs, rhs = identity_2f2_as_1f1_sum(*args)
        assert rel(lhs, rhs) <= 1e-10
    with pytest.raises(InvalidParameter):
        identity_2f2_as_1f1_sum(2, 1, 1, 1.0)


identity_args = st.tuples(st.floats(0.05, 10), st.floats(0.01, 10), st.integers(1, 8), st.floats(1e-6, 50)).map(
    lambda t: (t[0], t[0] + t[1], t[2], t[3])
)


@given(identity_args)
@settings(max_examples=200, deadline=None)
def test_identity_property(args):
    lhs, rhs = identity_2f2_as_1f1_sum(*args)
    assert rel(lhs, rhs) <= 1e-10


def test_mean_relationship_examples():
    for vec, want in (((0.5, 0.5, 4, 4), 0.5), ((2, 5, 0.5, 7), 0.21392)):
        lhs, rhs = mean_relationship_check(DNcBParams(*vec))
        assert rel(lhs, rhs) <= 1e-12
        assert lhs == pytest.approx(want, abs=1e-5)
    lhs, rhs = mean_relationship_check(DNcBParams(2, 3, 6, 0))
    assert rel(lhs, rhs) <= 1e-12
    with pytest.raises(DegenerateParameter):
        mean_relationship_check(DNcBParams(2, 3))


@given(dncb_params.filter(lambda p: p.lambda_plus > 1e-3))
@settings(max_examples=60, deadline=None)
def test_mean_relationship_property(p):
    lhs, rhs = mean_relationship_check(p)
    assert rel(lhs, rhs) <= 1e-12


# --- Ljunggren oracle ---------------------------------------------------------------------


def _ljunggren(alpha, n, x, y):
    lhs = sum(math.comb(alpha + k, k) * math.comb(n, k) * (x - y) ** (n - k) * y**k for k in range(n + 1))
    rhs = sum(math.comb(alpha, k) * math.comb(n, k) * x ** (n - k) * y**k for k in range(n + 1))
    return lhs, rhs


@pytest.mark.parametrize("alpha,n", list(product(range(0, 11), range(0, 11))))
def test_ljunggren_identity_exact(alpha, n):
    for x, y in ((Fraction(3, 7), Fraction(-5, 2)), (Fraction(1), Fraction(1, 3)), (Fraction(-11, 4), Fraction(2, 9))):
        lhs, rhs = _ljunggren(alpha, n, x, y)
        assert lhs == rhs
