"""Raw moments of the non-central chi-squared and non-central beta families.

Each quantity is available through at least two independent formulas so
that one can be checked against the other:

* non-central chi-squared: the classical gamma-ratio sum, the Stirling
  expansion (exact rational arithmetic), hard-coded polynomials for
  orders 1-4, and the zero-degrees-of-freedom Stirling formula;
* doubly non-central beta: the finite sum of ``r + 1`` Kummer functions,
  the single Kummer-function series, and the Poisson double series.

Every product ``exp(-lambda/2) * 1F1(...)`` is evaluated as one scaled
quantity, so large non-centralities do not overflow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateParameter, InvalidParameter, NonConvergence, OrderOutOfRange
from .special import (
    SeriesControl,
    _ctrl,
    hypergeometric_series,
    pochhammer,
    poly_derivative,
    rising_poly,
    stirling_first_unsigned,
    stirling_second,
)

MAX_ORDER = 32


class Method(str, enum.Enum):
    CLASSIC_SERIES_FREE = "ClassicSeriesFree"
    STIRLING_EXPANSION = "StirlingExpansion"
    ZERO_DF = "ZeroDf"
    DOUBLE_SERIES = "DoubleSeries"
    ONE_SERIES = "OneSeries"
    FINITE_SUM = "FiniteSum"
    REDUCED_MEAN = "ReducedMean"
    REDUCED_SECOND = "ReducedSecond"
    DEFINITIONAL_2F2 = "Definitional2F2"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class MomentResult:
    order: int
    value: float
    method: Method
    terms_used: int

    def __float__(self):
        return self.value


def _finite_nonneg(name, v):
    v = float(v)
    if not (math.isfinite(v) and v >= 0):
        raise InvalidParameter(f"{name} must be a finite nonnegative number, got {v}")
    return v


@dataclass(frozen=True)
class NcChiSqParams:
    """Degrees of freedom ``g`` and non-centrality ``lam`` of chi'^2_g(lam)."""

    g: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "g", _finite_nonneg("g", self.g))
        object.__setattr__(self, "lam", _finite_nonneg("lambda", self.lam))

    @property
    def h(self) -> float:
        return self.g / 2


@dataclass(frozen=True)
class DNcBParams:
    """Shapes ``alpha1, alpha2 > 0`` and non-centralities ``lambda1, lambda2 >= 0``."""

    alpha1: float
    alpha2: float
    lambda1: float = 0.0
    lambda2: float = 0.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise InvalidParameter(f"{name} must be a finite positive number, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "lambda1", _finite_nonneg("lambda1", self.lambda1))
        object.__setattr__(self, "lambda2", _finite_nonneg("lambda2", self.lambda2))

    @property
    def alpha_plus(self) -> float:
        return self.alpha1 + self.alpha2

    @property
    def lambda_plus(self) -> float:
        return self.lambda1 + self.lambda2

    @property
    def theta1(self) -> float:
        if self.lambda_plus == 0:
            raise DegenerateParameter("theta1 = lambda1 / lambda_plus is undefined when lambda_plus = 0")
        return self.lambda1 / self.lambda_plus

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.lambda1, self.lambda2)


def _order(r, lo=1, hi=MAX_ORDER) -> int:
    if isinstance(r, bool) or int(r) != r:
        raise OrderOutOfRange(f"moment order must be an integer, got {r!r}")
    r = int(r)
    if not lo <= r <= hi:
        raise OrderOutOfRange(f"moment order must lie in {lo}..{hi}, got {r}")
    return r


# ---------------------------------------------------------------------------
# Beta and Poisson building blocks
# ---------------------------------------------------------------------------


def beta_moment(alpha1: float, alpha2: float, r: int) -> float:
    """``E[Beta(alpha1, alpha2)^r] = (alpha1)_r / (alpha1 + alpha2)_r``."""
    r = _order(r)
    if not (alpha1 > 0 and alpha2 > 0):
        raise InvalidParameter("Beta shapes must be positive")
    ap = alpha1 + alpha2
    out = 1.0
    for k in range(r):
        out *= (alpha1 + k) / (ap + k)
    return out


def _poisson_moment_exact(mean: Fraction, i: int) -> Fraction:
    return sum((stirling_second(i, j) * mean**j for j in range(i + 1)), Fraction(0))


def poisson_raw_moment(mean: float, i: int) -> float:
    """``E[M^i]`` for ``M ~ Poisson(mean)``, as a Stirling-weighted polynomial."""
    mean = _finite_nonneg("mean", mean)
    if int(i) != i or i < 0:
        raise InvalidParameter(f"order must be a nonnegative integer, got {i!r}")
    return float(_poisson_moment_exact(Fraction(mean), int(i)))


# ---------------------------------------------------------------------------
# Non-central chi-squared
# ---------------------------------------------------------------------------


def _require_positive_df(p: NcChiSqParams):
    if not p.g > 0:
        raise InvalidParameter("this formula needs g > 0; use ncchisq_moment_zero_df for g = 0")


def ncchisq_moment_classic(p: NcChiSqParams, r: int) -> MomentResult:
    """Gamma-ratio sum ``2^r Gamma(r+h) sum_j C(r,j) (lam/2)^j / Gamma(j+h)``.

    The gamma ratios are taken as rising factorials ``(h+j)_{r-j}``.
    """
    r = _order(r)
    _require_positive_df(p)
    h, half = p.h, p.lam / 2
    terms = [math.comb(r, j) * half**j * pochhammer(h + j, r - j) for j in range(r + 1)]
    return MomentResult(r, 2.0**r * math.fsum(terms), Method.CLASSIC_SERIES_FREE, r + 1)


def ncchisq_moment_stirling(p: NcChiSqParams, r: int) -> MomentResult:
    """Moment from the Taylor expansion of ``(h + M)_r`` and Poisson moments.

    ``2^r sum_i (1/i!) [d^i/dh^i (h)_r] E[M^i]`` with
    ``E[M^i] = sum_j S(i,j) (lam/2)^j``; evaluated exactly, rounded once.
    """
    r = _order(r)
    _require_positive_df(p)
    h = Fraction(p.g) / 2
    half = Fraction(p.lam) / 2
    poly = rising_poly(r)
    total = Fraction(0)
    for i in range(r + 1):
        taylor = Fraction(poly_derivative(poly, i)(h), math.factorial(i))
        total += taylor * _poisson_moment_exact(half, i)
    return MomentResult(r, float(2**r * total), Method.STIRLING_EXPANSION, (r + 1) * (r + 2) // 2)


def _zero_df_exact(lam: Fraction, r: int) -> Fraction:
    half = lam / 2
    total = Fraction(0)
    for i in range(r + 1):
        total += stirling_first_unsigned(r, i) * _poisson_moment_exact(half, i)
    return 2**r * total


def ncchisq_moment_zero_df(lam: float, r: int) -> MomentResult:
    """Moments of the purely non-central chi-squared (zero degrees of freedom)."""
    r = _order(r)
    lam = _finite_nonneg("lambda", lam)
    return MomentResult(r, float(_zero_df_exact(Fraction(lam), r)), Method.ZERO_DF, (r + 1) * (r + 2) // 2)


def _closed_exact(g: Fraction, lam: Fraction, r: int) -> Fraction:
    if r == 1:
        return g + lam
    if r == 2:
        return g * (g + 2) + 2 * (g + 2) * lam + lam**2
    if r == 3:
        return g * (g + 2) * (g + 4) + 3 * (g + 2) * (g + 4) * lam + 3 * (g + 4) * lam**2 + lam**3
    return (
        g * (g + 2) * (g + 4) * (g + 6)
        + 4 * (g + 2) * (g + 4) * (g + 6) * lam
        + 6 * (g + 4) * (g + 6) * lam**2
        + 4 * (g + 6) * lam**3
        + lam**4
    )


def ncchisq_moment_closed(p: NcChiSqParams, r: int) -> float:
    """Polynomial closed forms for ``r = 1..4``; ``g = 0`` is allowed."""
    r = _order(r, 1, 4)
    return float(_closed_exact(Fraction(p.g), Fraction(p.lam), r))


def ncchisq_moment(p: NcChiSqParams, r: int) -> MomentResult:
    """Default route: Stirling expansion, or the zero-df formula when ``g = 0``."""
    if p.g == 0:
        return ncchisq_moment_zero_df(p.lam, r)
    return ncchisq_moment_stirling(p, r)


# ---------------------------------------------------------------------------
# Doubly non-central beta
# ---------------------------------------------------------------------------


def _kummer_scaled(a, b, x, ctrl):
    return hypergeometric_series((a,), (b,), x, ctrl, log_scale=x)


def _finite_sum(alpha1, alpha2, lambda1, lambda_plus, r, ctrl) -> tuple[float, int]:
    ap = alpha1 + alpha2
    half1 = lambda1 / 2
    half_plus = lambda_plus / 2
    total = []
    used = 0
    for i in range(r + 1):
        if i > 0 and half1 == 0:
            break
        coef = math.comb(r, i) * pochhammer(ap, i) * half1**i / (pochhammer(alpha1, i) * pochhammer(ap + r, i))
        f, n = _kummer_scaled(ap + i, ap + r + i, half_plus, ctrl)
        total.append(coef * f)
        used += n
    return beta_moment(alpha1, alpha2, r) * math.fsum(total), used


def dncb_moment_sum(p: DNcBParams, r: int, ctrl: SeriesControl | None = None) -> MomentResult:
    """Finite-sum moment of DNcB: ``r + 1`` Kummer functions at ``lambda_plus / 2``."""
    r = _order(r)
    value, used = _finite_sum(p.alpha1, p.alpha2, p.lambda1, p.lambda_plus, r, _ctrl(ctrl))
    return MomentResult(r, value, Method.FINITE_SUM, used)


def _log_poisson(k, mu):
    k = np.asarray(k, dtype=float)
    if mu == 0:
        return np.where(k == 0, 0.0, -np.inf)
    return -mu + k * math.log(mu) - gammaln(k + 1)


def dncb_moment_one_series(p: DNcBParams, r: int, ctrl: SeriesControl | None = None) -> MomentResult:
    """Moment as an infinite series of Kummer functions in ``lambda2 / 2``.

    This is the existing (slow) formula used as the benchmark baseline.
    """
    r = _order(r)
    ctrl = _ctrl(ctrl)
    a1, ap = p.alpha1, p.alpha_plus
    mu1, half2 = p.lambda1 / 2, p.lambda2 / 2
    coef = 1.0  # (ap)_j (a1+r)_j / ((a1)_j (ap+r)_j)
    parts = []
    partial = 0.0
    used = 0
    run = 0
    for j in range(ctrl.max_terms):
        if j > 0:
            coef *= (ap + j - 1) * (a1 + r + j - 1) / ((a1 + j - 1) * (ap + r + j - 1))
        f, n = _kummer_scaled(ap + j, ap + r + j, half2, ctrl)
        used += n + 1
        term = math.exp(float(_log_poisson(j, mu1))) * coef * f
        parts.append(term)
        partial += term
        if mu1 == 0:
            break
        if j > mu1 and partial > 0 and term <= ctrl.rel_tol * partial:
            run += 1
            if run == 2:
                break
        else:
            run = 0
    else:
        raise NonConvergence(f"one-series DNcB moment did not converge in {ctrl.max_terms} terms")
    return MomentResult(r, beta_moment(p.alpha1, p.alpha2, r) * math.fsum(parts), Method.ONE_SERIES, used)


def dncb_moment_double_series(p: DNcBParams, r: int, ctrl: SeriesControl | None = None) -> MomentResult:
    """Poisson-weighted double series of Beta moments, summed along diagonals."""
    r = _order(r)
    ctrl = _ctrl(ctrl)
    a1, ap = p.alpha1, p.alpha_plus
    mu1, mu2 = p.lambda1 / 2, p.lambda2 / 2
    mu_plus = mu1 + mu2
    steps = np.arange(r)
    diags = []
    partial = 0.0
    run = 0
    for s in range(ctrl.max_terms):
        j = np.arange(s + 1)
        logw = _log_poisson(j, mu1) + _log_poisson(s - j, mu2)
        # (a1+j)_r / (ap+s)_r
        bm = np.prod((a1 + j[:, None] + steps) / (ap + s + steps), axis=1)
        d = math.fsum(np.exp(logw) * bm)
        diags.append(d)
        partial += d
        if s > mu_plus and partial > 0 and d <= ctrl.rel_tol * partial:
            run += 1
            if run == 2:
                return MomentResult(r, math.fsum(diags), Method.DOUBLE_SERIES, (s + 1) * (s + 2) // 2)
        else:
            run = 0
    raise NonConvergence(f"double-series DNcB moment did not converge in {ctrl.max_terms} diagonals")


def _require_noncentral(p: DNcBParams):
    if p.lambda_plus == 0:
        raise DegenerateParameter("lambda1 + lambda2 = 0: use beta_moment instead")


def dncb_mean_weight(p: DNcBParams, ctrl: SeriesControl | None = None) -> float:
    """Weight ``w = exp(-lp/2) 1F1(a+; a+ + 1; lp/2)`` placed on the Beta mean."""
    _require_noncentral(p)
    return _kummer_scaled(p.alpha_plus, p.alpha_plus + 1, p.lambda_plus / 2, _ctrl(ctrl))[0]


def dncb_mean_reduced(p: DNcBParams, ctrl: SeriesControl | None = None) -> float:
    """DNcB mean as a convex combination of ``alpha1/alpha+`` and ``lambda1/lambda+``.

    Needs only one Kummer function.  Raises :class:`DegenerateParameter`
    when ``lambda1 + lambda2 = 0``.
    """
    w = dncb_mean_weight(p, ctrl)
    return p.alpha1 / p.alpha_plus * w + p.theta1 * (1 - w)


def dncb_second_moment_reduced(p: DNcBParams, ctrl: SeriesControl | None = None) -> float:
    """Second DNcB moment from two Kummer functions instead of three."""
    _require_noncentral(p)
    ctrl = _ctrl(ctrl)
    a1, ap = p.alpha1, p.alpha_plus
    lam1 = p.lambda1
    hp = p.lambda_plus / 2
    sq = (lam1 / 2) ** 2
    f0 = _kummer_scaled(ap, ap + 2, hp, ctrl)[0]
    f1 = _kummer_scaled(ap + 1, ap + 3, hp, ctrl)[0]
    first = a1 * (a1 + 1) / (ap * (ap + 1)) * f0
    second = (lam1 * (a1 + 1) / (ap + 1) - sq / (ap + 1 + hp)) / (ap + 2) * f1
    third = sq / (hp * (ap + 1 + hp)) * (1 - f1)
    return first + second + third


def ncb1_moment(alpha1, alpha2, lam, r, ctrl: SeriesControl | None = None) -> MomentResult:
    """Type I non-central beta moment (``lambda2 = 0``) as a finite sum."""
    return dncb_moment_sum(DNcBParams(alpha1, alpha2, lam, 0.0), r, ctrl)


def ncb1_moment_definitional(alpha1, alpha2, lam, r, ctrl: SeriesControl | None = None) -> MomentResult:
    """Type I non-central beta moment through ``2F2(a1+r, a+; a1, a+ + r; lam/2)``."""
    r = _order(r)
    p = DNcBParams(alpha1, alpha2, lam, 0.0)
    ap = p.alpha_plus
    half = p.lambda1 / 2
    f, n = hypergeometric_series((alpha1 + r, ap), (alpha1, ap + r), half, _ctrl(ctrl), log_scale=half)
    return MomentResult(r, beta_moment(alpha1, alpha2, r) * f, Method.DEFINITIONAL_2F2, n)


def ncb2_moment(alpha1, alpha2, lam, r, ctrl: SeriesControl | None = None) -> MomentResult:
    """Type II non-central beta moment ``E[Beta^r] exp(-lam/2) 1F1(a+; a+ + r; lam/2)``."""
    r = _order(r)
    p = DNcBParams(alpha1, alpha2, 0.0, lam)
    half = p.lambda2 / 2
    f, n = _kummer_scaled(p.alpha_plus, p.alpha_plus + r, half, _ctrl(ctrl))
    return MomentResult(r, beta_moment(alpha1, alpha2, r) * f, Method.FINITE_SUM, n)


# ---------------------------------------------------------------------------
# Identities
# ---------------------------------------------------------------------------


def identity_2f2_as_1f1_sum(a, b, n, x, ctrl: SeriesControl | None = None) -> tuple[float, float]:
    """Both sides of ``2F2(a+n, b; a, b+n; x) = sum_i c_i 1F1(b+i; b+n+i; x)``.

    Requires ``b > a > 0``, integer ``n >= 1`` and ``x >= 0``.
    """
    if not b > a > 0:
        raise InvalidParameter(f"need b > a > 0, got a={a}, b={b}")
    n = _order(n)
    if x < 0:
        raise InvalidParameter("x must be nonnegative")
    ctrl = _ctrl(ctrl)
    lhs = hypergeometric_series((a + n, b), (a, b + n), x, ctrl)[0]
    parts = []
    for i in range(n + 1):
        coef = math.comb(n, i) * pochhammer(b, i) * x**i / (pochhammer(a, i) * pochhammer(b + n, i))
        parts.append(coef * hypergeometric_series((b + i,), (b + n + i,), x, ctrl)[0])
    return lhs, math.fsum(parts)


def mean_relationship_check(p: DNcBParams, ctrl: SeriesControl | None = None) -> tuple[float, float]:
    """DNcB mean versus the ``theta``-weighted NcB1 and NcB2 means at ``lambda_plus``."""
    _require_noncentral(p)
    lp = p.lambda_plus
    lhs = dncb_moment_sum(p, 1, ctrl).value
    rhs = (p.lambda1 / lp) * ncb1_moment(p.alpha1, p.alpha2, lp, 1, ctrl).value + (
        p.lambda2 / lp
    ) * ncb2_moment(p.alpha1, p.alpha2, lp, 1, ctrl).value
    return lhs, rhs
