"""Random variate generation with reproducible per-stream generators.

Every sampler takes an :class:`RngStream` and an optional ``size``; with
``size=None`` a Python scalar is returned, otherwise a NumPy array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .moments import DNcBParams, NcChiSqParams

_U64 = 1 << 64


class RngStream:
    """A Philox generator keyed by ``(seed, stream_id)``.

    Equal keys reproduce identical draw sequences; distinct ``stream_id``
    values give independent streams for the same seed.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        for name, v in (("seed", seed), ("stream_id", stream_id)):
            if int(v) != v or not 0 <= int(v) < _U64:
                raise InvalidParameter(f"{name} must be an unsigned 64-bit integer, got {v!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


@dataclass(frozen=True)
class LatentCounts:
    """Poisson counts behind one DNcB draw; ``i_star`` is the Binomial index."""

    m1: int
    m2: int
    m_plus: int
    i_star: int

    def __post_init__(self):
        if self.m1 + self.m2 != self.m_plus or not 0 <= self.i_star <= self.m_plus:
            raise InvalidParameter(f"inconsistent latent counts {self}")


def _out(arr, size):
    if size is None and arr.ndim == 0:
        return arr.item()
    return arr


def sample_poisson(mean: float, rng: RngStream, size=None):
    if not mean >= 0:
        raise InvalidParameter(f"Poisson mean must be >= 0, got {mean}")
    if mean == 0:
        return np.zeros(size, dtype=np.int64) if size is not None else 0
    return _out(np.asarray(rng.generator.poisson(mean, size)), size)


def sample_gamma(shape, rng: RngStream, size=None):
    """Unit-scale Gamma; ``shape = 0`` is the point mass at zero."""
    shape = np.asarray(shape, dtype=float)
    if np.any(shape < 0):
        raise InvalidParameter("Gamma shape must be >= 0")
    return _out(np.asarray(rng.generator.standard_gamma(shape, size)), size)


def sample_chisq(df, rng: RngStream, size=None):
    df = np.asarray(df, dtype=float)
    if np.any(df <= 0):
        raise InvalidParameter("chi-squared degrees of freedom must be > 0")
    return _out(2.0 * np.asarray(rng.generator.standard_gamma(df / 2, size)), size)


def sample_beta(a, b, rng: RngStream, size=None):
    """Beta draw as ``G1 / (G1 + G2)`` with independent Gamma variates.

    Beta(a, 0) is the point mass at one and Beta(0, b) the point mass at
    zero.  Shapes may be arrays that broadcast against ``size``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a < 0) or np.any(b < 0) or np.any((a == 0) & (b == 0)):
        raise InvalidParameter("Beta shapes must be >= 0 and not both zero")
    shape = size if size is not None else np.broadcast(a, b).shape
    g1 = np.atleast_1d(rng.generator.standard_gamma(np.broadcast_to(a, shape)))
    g2 = np.atleast_1d(rng.generator.standard_gamma(np.broadcast_to(b, shape)))
    denom = g1 + g2
    x = np.divide(g1, denom, out=np.empty_like(denom), where=denom > 0)
    # both Gamma draws underflowed (only possible for tiny shapes)
    bad = ~(denom > 0)
    if bad.any():
        aa = np.broadcast_to(a, g1.shape)[bad]
        bb = np.broadcast_to(b, g1.shape)[bad]
        fill = np.where(aa == 0, 0.0, 1.0)
        both = (aa > 0) & (bb > 0)
        fill[both] = rng.generator.beta(aa[both], bb[both])
        x[bad] = fill
    return _out(x.reshape(shape), size)


def sample_binomial(n, p, rng: RngStream, size=None):
    n = np.asarray(n)
    p = np.asarray(p, dtype=float)
    if np.any(n < 0) or np.any((p < 0) | (p > 1)):
        raise InvalidParameter("Binomial needs n >= 0 and 0 <= p <= 1")
    return _out(np.asarray(rng.generator.binomial(n, p, size)), size)


def sample_ncchisq_mixture(p: NcChiSqParams, rng: RngStream, size=None):
    """Draw ``M ~ Poisson(lam/2)`` then a chi-squared with ``g + 2M`` df."""
    if not p.g > 0:
        raise InvalidParameter("mixture sampler needs g > 0")
    m = sample_poisson(p.lam / 2, rng, size)
    return _out(2.0 * np.asarray(rng.generator.standard_gamma(p.h + np.asarray(m))), size)


def sample_ncchisq_additive(p: NcChiSqParams, rng: RngStream, size=None):
    """Central chi-squared_g plus a Poisson(lam/2) number of chi-squared_2 terms."""
    n = 1 if size is None else int(np.prod(size))
    central = sample_chisq(p.g, rng, n) if p.g > 0 else np.zeros(n)
    m = np.asarray(sample_poisson(p.lam / 2, rng, n))
    total = int(m.sum())
    if total:
        f = rng.generator.exponential(2.0, total)  # chi-squared_2 draws
        owner = np.repeat(np.arange(n), m)
        central = central + np.bincount(owner, weights=f, minlength=n)
    if size is None:
        return float(central[0])
    return central.reshape(size)


def sample_dncb_many(p: DNcBParams, rng: RngStream, n: int):
    """Vectorised DNcB draws.

    Returns ``(x, m_plus, i_star)`` arrays of length ``n``: ``M+`` is
    Poisson(lambda+/2), ``i*`` is Binomial(M+, lambda1/lambda+), and ``x``
    is a Beta(alpha1 + i*, alpha2 + M+ - i*) draw.
    """
    m_plus = np.asarray(sample_poisson(p.lambda_plus / 2, rng, n))
    if p.lambda_plus > 0:
        i_star = np.asarray(sample_binomial(m_plus, p.theta1, rng, size=m_plus.shape))
    else:
        i_star = np.zeros(n, dtype=np.int64)
    x = sample_beta(p.alpha1 + i_star, p.alpha2 + (m_plus - i_star), rng, size=(n,))
    return x, m_plus, i_star


def sample_dncb(p: DNcBParams, rng: RngStream) -> tuple[float, LatentCounts]:
    x, m_plus, i_star = sample_dncb_many(p, rng, 1)
    mp, i = int(m_plus[0]), int(i_star[0])
    return float(x[0]), LatentCounts(i, mp - i, mp, i)
