"""Density evaluation for the DNcB family.

Two independent representations are provided: the Poisson double mixture
of Beta densities and the Beta density perturbed by Humbert's Psi2.
Densities are only defined on the open interval, so ``x`` must satisfy
``0 < x < 1``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import betaln
from scipy.stats import binom

from .errors import DegenerateParameter, InvalidParameter, NonConvergence
from .moments import DNcBParams, _log_poisson
from .special import SeriesControl, _ctrl, humbert_psi2_series, hypergeometric_series


def _interior(x) -> float:
    x = float(x)
    if not 0.0 < x < 1.0:
        raise InvalidParameter(f"density needs 0 < x < 1, got {x}")
    return x


def _log_beta_pdf(x, a, b):
    return (a - 1) * math.log(x) + (b - 1) * math.log1p(-x) - betaln(a, b)


def beta_pdf(x: float, a: float, b: float) -> float:
    x = _interior(x)
    if not (a > 0 and b > 0):
        raise InvalidParameter("Beta density needs positive shapes")
    return float(np.exp(_log_beta_pdf(x, a, b)))


def dncb_conditional_density(x: float, m_plus: int, p: DNcBParams, ctrl: SeriesControl | None = None) -> float:
    """Density of the DNcB ratio given the Poisson total ``M+ = m_plus``.

    A Binomial(m_plus, lambda1/lambda+) mixture of
    Beta(alpha1 + i, alpha2 + m_plus - i) densities.
    """
    x = _interior(x)
    m = int(m_plus)
    if m != m_plus or m < 0:
        raise InvalidParameter(f"m_plus must be a nonnegative integer, got {m_plus!r}")
    if m == 0:
        return beta_pdf(x, p.alpha1, p.alpha2)
    if p.lambda_plus == 0:
        raise DegenerateParameter("Binomial weights need lambda1 + lambda2 > 0 when m_plus > 0")
    i = np.arange(m + 1)
    w = binom.pmf(i, m, p.theta1)
    dens = np.exp(_log_beta_pdf(x, p.alpha1 + i, p.alpha2 + m - i))
    return float(math.fsum(w * dens))


def dncb_density_mixture(x: float, p: DNcBParams, ctrl: SeriesControl | None = None) -> float:
    """Poisson(lambda1/2) x Poisson(lambda2/2) mixture of Beta densities."""
    x = _interior(x)
    ctrl = _ctrl(ctrl)
    mu1, mu2 = p.lambda1 / 2, p.lambda2 / 2
    mu_plus = mu1 + mu2
    diags = []
    partial = 0.0
    run = 0
    for s in range(ctrl.max_terms):
        j = np.arange(s + 1)
        logt = _log_poisson(j, mu1) + _log_poisson(s - j, mu2) + _log_beta_pdf(x, p.alpha1 + j, p.alpha2 + s - j)
        d = math.fsum(np.exp(logt))
        diags.append(d)
        partial += d
        if s >= mu_plus and partial > 0 and d <= ctrl.rel_tol * partial:
            run += 1
            if run == 2:
                return math.fsum(diags)
        else:
            run = 0
    raise NonConvergence(f"DNcB mixture density at x={x} did not converge")


def dncb_density_perturbation(x: float, p: DNcBParams, ctrl: SeriesControl | None = None) -> float:
    """Beta density times ``exp(-lambda+/2) Psi2[a+; a1, a2; (l1/2) x, (l2/2)(1-x)]``."""
    x = _interior(x)
    psi, _ = humbert_psi2_series(
        p.alpha_plus,
        p.alpha1,
        p.alpha2,
        p.lambda1 / 2 * x,
        p.lambda2 / 2 * (1 - x),
        ctrl,
        log_scale=p.lambda_plus / 2,
    )
    return beta_pdf(x, p.alpha1, p.alpha2) * psi


def ncb1_density(x: float, alpha1: float, alpha2: float, lam: float, ctrl: SeriesControl | None = None) -> float:
    """Type I non-central beta density ``Beta(x) exp(-lam/2) 1F1(a+; a1; lam x / 2)``."""
    x = _interior(x)
    p = DNcBParams(alpha1, alpha2, lam, 0.0)
    f, _ = hypergeometric_series((p.alpha_plus,), (alpha1,), lam / 2 * x, _ctrl(ctrl), log_scale=lam / 2)
    return beta_pdf(x, alpha1, alpha2) * f


def integrate_unit_interval(f, epsabs=1e-13, epsrel=1e-12) -> tuple[float, float]:
    """Adaptive quadrature of ``f`` over (0, 1) that never touches the endpoints.

    Substituting ``x = sin(pi t / 2)^2`` cancels ``x^(-1/2)``-type
    endpoint singularities; returns ``(integral, error_estimate)``.
    """

    def g(t):
        x = math.sin(0.5 * math.pi * t) ** 2
        if not 0.0 < x < 1.0:
            return 0.0
        return f(x) * 0.5 * math.pi * math.sin(math.pi * t)

    val, err = quad(g, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=200)
    return val, err


DENSITY_REPRESENTATIONS = {
    "mixture": dncb_density_mixture,
    "perturbation": dncb_density_perturbation,
}
