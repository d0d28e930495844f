"""Exact combinatorics and hypergeometric series.

Everything here is a pure function.  Stirling tables are memoized and
immutable once built.

Hypergeometric series are summed term by term with the ratio recurrence
and a running power-of-two rescale, so the ``*_scaled`` entry points can
return ``exp(-x) * F(x)`` for arguments well past the double-precision
overflow threshold of ``F`` itself.
"""

from __future__ import annotations

import math
import operator
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidParameter, NonConvergence

__all__ = [
    "SeriesControl",
    "DEFAULT_CONTROL",
    "IntPoly",
    "RisingFactorialPoly",
    "pochhammer",
    "stirling_second",
    "stirling_first_unsigned",
    "rising_poly",
    "poly_derivative",
    "poch_binomial_expansion",
    "poch_binomial_sum",
    "hypergeometric_series",
    "hyp_pfq",
    "kummer_1f1",
    "kummer_1f1_scaled",
    "hyp_2f2",
    "hyp_2f2_scaled",
    "humbert_psi2",
    "humbert_psi2_series",
    "RecurrenceResidual",
    "kummer_recurrence_residuals",
]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by every infinite series.

    A series stops once two consecutive terms are each no larger than
    ``rel_tol`` times the running partial sum (or ``abs_floor``).
    Hitting ``max_terms`` first raises :class:`NonConvergence`.
    """

    rel_tol: float = 1e-14
    abs_floor: float = 1e-300
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParameter(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_floor >= 0:
            raise InvalidParameter(f"abs_floor must be >= 0, got {self.abs_floor}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise InvalidParameter(f"max_terms must be a positive integer, got {self.max_terms}")

    @classmethod
    def from_env(cls, environ=None, **kwargs) -> "SeriesControl":
        """Build a control, letting ``NCB_MAX_TERMS`` override ``max_terms``."""
        environ = os.environ if environ is None else environ
        raw = environ.get("NCB_MAX_TERMS")
        if raw is not None and "max_terms" not in kwargs:
            try:
                kwargs["max_terms"] = int(raw)
            except ValueError:
                raise InvalidParameter(f"NCB_MAX_TERMS must be a positive integer, got {raw!r}") from None
        return cls(**kwargs)


DEFAULT_CONTROL = SeriesControl()


def _ctrl(ctrl):
    return DEFAULT_CONTROL if ctrl is None else ctrl


def _as_order(l, name="l") -> int:
    try:
        l = operator.index(l)
    except TypeError:
        if isinstance(l, float) and l.is_integer():
            l = int(l)
        else:
            raise InvalidParameter(f"{name} must be a nonnegative integer, got {l!r}") from None
    if l < 0:
        raise InvalidParameter(f"{name} must be a nonnegative integer, got {l}")
    return l


# ---------------------------------------------------------------------------
# Pochhammer symbol
# ---------------------------------------------------------------------------

_PRODUCT_LIMIT = 512


def pochhammer(a: float, l: int) -> float:
    """Rising factorial ``(a)_l = a (a+1) ... (a+l-1)``.

    ``(a)_0 = 1`` for every ``a``, including ``a = 0``; ``(0)_l = 0`` for
    ``l >= 1``.  Small orders use the direct product; if the product
    overflows (or ``l`` is large) the log-gamma difference is used, which
    raises ``OverflowError`` when the value is not representable.
    """
    l = _as_order(l)
    if l == 0:
        return 1.0
    a = float(a)
    if a == 0.0:
        return 0.0
    if l <= _PRODUCT_LIMIT:
        out = 1.0
        for k in range(l):
            out *= a + k
        if math.isfinite(out):
            return out
    if a < 0:
        raise InvalidParameter("log-gamma evaluation of (a)_l needs a > 0")
    return math.exp(math.lgamma(a + l) - math.lgamma(a))


# ---------------------------------------------------------------------------
# Stirling numbers
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _stirling2_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _stirling2_row(n - 1)
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        left = prev[k] if k < len(prev) else 0
        row[k] = k * left + prev[k - 1]
    return tuple(row)


@lru_cache(maxsize=None)
def _stirling1_row(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _stirling1_row(n - 1)
    m = n - 1
    row = [0] * (n + 1)
    for k in range(1, n + 1):
        left = prev[k] if k < len(prev) else 0
        row[k] = m * left + prev[k - 1]
    return tuple(row)


def stirling_second(i: int, j: int) -> int:
    """Stirling number of the second kind S(i, j); 0 when j > i."""
    i, j = _as_order(i, "i"), _as_order(j, "j")
    if j > i:
        return 0
    return _stirling2_row(i)[j]


def stirling_first_unsigned(r: int, i: int) -> int:
    """Unsigned Stirling number of the first kind |s(r, i)|."""
    r, i = _as_order(r, "r"), _as_order(i, "i")
    if i > r:
        return 0
    return _stirling1_row(r)[i]


# ---------------------------------------------------------------------------
# Integer polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntPoly:
    """Polynomial with exact integer coefficients, lowest power first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            object.__setattr__(self, "coeffs", (0,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, a):
        # Horner; exact for int/Fraction arguments
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * a + c
        return acc

    def derivative(self, i: int = 1) -> "IntPoly":
        return poly_derivative(self, i)


@dataclass(frozen=True)
class RisingFactorialPoly(IntPoly):
    """``(a)_l`` as a polynomial in ``a``; coefficients are |s(l, k)|."""


@lru_cache(maxsize=None)
def rising_poly(l: int) -> RisingFactorialPoly:
    """Expand ``a (a+1) ... (a+l-1)`` by repeated multiplication."""
    l = _as_order(l)
    coeffs = [1]
    for m in range(l):
        # multiply by (a + m)
        nxt = [0] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k] += m * c
            nxt[k + 1] += c
        coeffs = nxt
    return RisingFactorialPoly(tuple(coeffs))


def poly_derivative(p: IntPoly, i: int) -> IntPoly:
    i = _as_order(i, "i")
    if i == 0:
        return p
    if i > p.degree:
        return IntPoly((0,))
    return IntPoly(tuple(c * math.perm(k, i) for k, c in enumerate(p.coeffs) if k >= i))


def poch_binomial_expansion(a: float, b: float, l: int) -> float:
    """``(a+b)_l`` via its Taylor expansion in ``b`` about ``a``.

    Returns ``sum_i (1/i!) [d^i/da^i (a)_l] b^i``.  The sum is carried out
    in exact rational arithmetic on the binary values of ``a`` and ``b``
    and rounded once at the end.
    """
    l = _as_order(l)
    p = rising_poly(l)
    A, B = Fraction(a), Fraction(b)
    total = Fraction(0)
    bpow = Fraction(1)
    for i in range(l + 1):
        d = poly_derivative(p, i)
        total += Fraction(d(A)) / math.factorial(i) * bpow
        bpow *= B
    return float(total)


def poch_binomial_sum(a: float, b: float, n: int) -> float:
    """Vandermonde form ``sum_j C(n, j) (a)_{n-j} (b)_j``."""
    n = _as_order(n, "n")
    return math.fsum(math.comb(n, j) * pochhammer(a, n - j) * pochhammer(b, j) for j in range(n + 1))


# ---------------------------------------------------------------------------
# Hypergeometric series
# ---------------------------------------------------------------------------

_RESCALE_BITS = 900
_RESCALE = 2.0**_RESCALE_BITS
# Cody-Waite split of ln 2: m * _LN2_HI is exact for |m| < 2**20
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10


def _is_pole(b) -> bool:
    return b <= 0 and float(b).is_integer()


def _check_denominators(den):
    for b in den:
        if _is_pole(b):
            raise InvalidParameter(f"denominator parameter {b} is a nonpositive integer")


def _unscale(total: float, exp2: int, log_scale: float) -> float:
    """Return ``total * 2**exp2 * exp(-log_scale)`` without intermediate overflow."""
    if total == 0.0:
        return 0.0
    if log_scale == 0.0:
        return math.ldexp(total, exp2)
    m = round(log_scale / math.log(2.0))
    resid = (m * _LN2_HI - log_scale) + m * _LN2_LO
    return math.ldexp(total * math.exp(resid), exp2 - m)


def hypergeometric_series(
    num: Sequence[float],
    den: Sequence[float],
    x: float,
    ctrl: SeriesControl | None = None,
    log_scale: float = 0.0,
) -> tuple[float, int]:
    """Sum ``exp(-log_scale) * pFq(num; den; x)``.

    Returns ``(value, terms_used)``.  Entire-function behaviour (p <= q)
    is assumed and not checked.
    """
    ctrl = _ctrl(ctrl)
    _check_denominators(den)
    x = float(x)
    term = 1.0
    total = 1.0
    exp2 = 0
    run = 0
    rel, floor = ctrl.rel_tol, ctrl.abs_floor
    for i in range(ctrl.max_terms):
        ratio = x / (i + 1)
        for a in num:
            ratio *= a + i
        for b in den:
            ratio /= b + i
        term *= ratio
        total += term
        if abs(total) > _RESCALE or abs(term) > _RESCALE:
            term /= _RESCALE
            total /= _RESCALE
            exp2 += _RESCALE_BITS
        if abs(term) <= rel * abs(total) or abs(term) <= floor:
            run += 1
            if run == 2:
                return _unscale(total, exp2, log_scale), i + 2
        else:
            run = 0
    raise NonConvergence(
        f"{len(num)}F{len(den)}({list(num)}; {list(den)}; {x}) did not converge in {ctrl.max_terms} terms"
    )


def hyp_pfq(num: Sequence[float], den: Sequence[float], x: float, ctrl: SeriesControl | None = None) -> float:
    return hypergeometric_series(num, den, x, ctrl)[0]


def kummer_1f1(a: float, b: float, x: float, ctrl: SeriesControl | None = None) -> float:
    """Kummer's confluent hypergeometric function 1F1(a; b; x).

    Raises ``OverflowError`` once the value exceeds double range
    (x beyond roughly 700); use :func:`kummer_1f1_scaled` there.
    """
    return hypergeometric_series((a,), (b,), x, ctrl)[0]


def kummer_1f1_scaled(a: float, b: float, x: float, ctrl: SeriesControl | None = None) -> float:
    """``exp(-x) * 1F1(a; b; x)``, finite for large ``x``."""
    return hypergeometric_series((a,), (b,), x, ctrl, log_scale=x)[0]


def hyp_2f2(a1, a2, b1, b2, x, ctrl: SeriesControl | None = None) -> float:
    return hypergeometric_series((a1, a2), (b1, b2), x, ctrl)[0]


def hyp_2f2_scaled(a1, a2, b1, b2, x, ctrl: SeriesControl | None = None) -> float:
    return hypergeometric_series((a1, a2), (b1, b2), x, ctrl, log_scale=x)[0]


def humbert_psi2_series(
    a: float,
    b1: float,
    b2: float,
    x: float,
    y: float,
    ctrl: SeriesControl | None = None,
    log_scale: float = 0.0,
) -> tuple[float, int]:
    """``exp(-log_scale) * Psi2[a; b1, b2; x, y]`` by diagonal summation.

    Diagonal ``s`` holds the terms with ``j + k = s``.  Summation stops
    after two consecutive diagonals are negligible against the partial
    sum.  Returns ``(value, diagonals_used)``.
    """
    ctrl = _ctrl(ctrl)
    _check_denominators((b1, b2))
    if x < 0 or y < 0:
        raise InvalidParameter("Psi2 arguments must be nonnegative")
    x, y = float(x), float(y)
    diag = np.ones(1)
    total = 1.0
    exp2 = 0
    run = 0
    for s in range(1, ctrl.max_terms):
        k = s - np.arange(s)  # k >= 1 along the previous diagonal
        new = np.empty(s + 1)
        new[:s] = diag * ((a + s - 1) * y / ((b2 + k - 1) * k))
        new[s] = diag[s - 1] * ((a + s - 1) * x / ((b1 + s - 1) * s))
        diag = new
        d = float(diag.sum())
        total += d
        if abs(total) > _RESCALE:
            diag /= _RESCALE
            d /= _RESCALE
            total /= _RESCALE
            exp2 += _RESCALE_BITS
        if abs(d) <= ctrl.rel_tol * abs(total) or abs(d) <= ctrl.abs_floor:
            run += 1
            if run == 2:
                return _unscale(total, exp2, log_scale), s + 1
        else:
            run = 0
    raise NonConvergence(f"Psi2[{a}; {b1}, {b2}; {x}, {y}] did not converge in {ctrl.max_terms} diagonals")


def humbert_psi2(a, b1, b2, x, y, ctrl: SeriesControl | None = None) -> float:
    """Humbert's confluent function Psi2[a; b1, b2; x, y]."""
    return humbert_psi2_series(a, b1, b2, x, y, ctrl)[0]


# ---------------------------------------------------------------------------
# Contiguous relations
# ---------------------------------------------------------------------------


class RecurrenceResidual(NamedTuple):
    value: float
    scale: float

    @property
    def relative(self) -> float:
        return abs(self.value) / self.scale if self.scale else abs(self.value)


def _times_lower(c, a, x, ctrl):
    """``c * 1F1(a; c; x)``, continuous through the pole at c = 0."""
    if c == 0:
        return a * x * kummer_1f1(a + 1, 2, x, ctrl)
    return c * kummer_1f1(a, c, x, ctrl)


def _residual(*terms) -> RecurrenceResidual:
    return RecurrenceResidual(math.fsum(terms), max(abs(t) for t in terms))


def kummer_recurrence_residuals(
    a: float, b: float, x: float, ctrl: SeriesControl | None = None
) -> tuple[RecurrenceResidual, RecurrenceResidual, RecurrenceResidual, RecurrenceResidual]:
    """Evaluate the four classical contiguous relations of 1F1.

    Each entry carries the left-hand side (which should vanish) and the
    largest absolute term in that relation.  When ``b = 1`` the
    ``(b-1) 1F1(a; b-1; x)`` products take their limiting value.
    """
    f = kummer_1f1(a, b, x, ctrl)
    f_am = kummer_1f1(a - 1, b, x, ctrl)
    f_ap = kummer_1f1(a + 1, b, x, ctrl)
    f_bp = kummer_1f1(a, b + 1, x, ctrl)
    lower = _times_lower(b - 1, a, x, ctrl)  # (b-1) 1F1(a; b-1; x)
    return (
        _residual((b - a) * f_am, (2 * a - b + x) * f, -a * f_ap),
        _residual(b * lower, b * (1 - b - x) * f, x * (b - a) * f_bp),
        _residual(b * (a + x) * f, x * (a - b) * f_bp, -a * b * f_ap),
        _residual((a - 1 + x) * f, (b - a) * f_am, -lower),
    )
