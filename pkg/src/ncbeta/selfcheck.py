"""Invariant suites run by ``ncbeta selfcheck``.

Each suite evaluates one family of identities over a parameter grid and
reports the worst error against its tolerance.  The Kummer recurrence
suite runs first because every other formula is built on 1F1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

from . import special
from .density import dncb_density_mixture, dncb_density_perturbation
from .moments import (
    DNcBParams,
    NcChiSqParams,
    dncb_moment_double_series,
    dncb_moment_one_series,
    dncb_moment_sum,
    identity_2f2_as_1f1_sum,
    mean_relationship_check,
    ncchisq_moment_classic,
    ncchisq_moment_closed,
    ncchisq_moment_stirling,
)
from .special import SeriesControl, poch_binomial_expansion, pochhammer, stirling_first_unsigned

GRIDS = ("default", "wide")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    cases: int
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance


def _rel(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale else 0.0


def _grid(default, wide, grid):
    return default if grid == "default" else default + wide


def check_kummer_recurrence(grid="default", ctrl: SeriesControl | None = None) -> CheckResult:
    pts = _grid(
        [(0.5, 1.0, 2.0), (1.5, 2.5, 4.0), (3.0, 1.5, 0.5), (2.0, 5.0, 10.0)],
        [(0.25, 3.0, 25.0), (7.5, 2.0, 60.0), (4.0, 1.0, 150.0), (12.0, 9.5, 0.01)],
        grid,
    )
    worst = 0.0
    for a, b, x in pts:
        res = special.kummer_recurrence_residuals(a, b, x, ctrl)
        worst = max(worst, max(r.relative for r in res))
    return CheckResult("kummer-recurrence", len(pts), worst, 1e-10)


def check_poch_binomial(grid="default", ctrl=None) -> CheckResult:
    ab = _grid([(0.5, 0.5), (1.0, 2.5), (3.25, 0.75)], [(7.5, 4.0), (0.1, 12.0), (20.0, 0.3)], grid)
    ls = range(0, 9) if grid == "default" else range(0, 16)
    worst = 0.0
    for (a, b), l in itertools.product(ab, ls):
        worst = max(worst, _rel(poch_binomial_expansion(a, b, l), pochhammer(a + b, l)))
    return CheckResult("poch-binomial-expansion", len(ab) * len(ls), worst, 1e-11)


def check_stirling_duality(grid="default", ctrl=None) -> CheckResult:
    top_r, top_m = (8, 10) if grid == "default" else (12, 20)
    bad = 0
    cases = 0
    for r in range(1, top_r + 1):
        for m in range(0, top_m + 1):
            lhs = sum(stirling_first_unsigned(r, i) * m**i for i in range(r + 1))
            bad += lhs != math.prod(range(m, m + r))
            cases += 1
    return CheckResult("stirling-duality", cases, float(bad), 0.0)


def check_identity_2f2(grid="default", ctrl=None) -> CheckResult:
    pts = _grid(
        [(0.5, 3.0, 4, 2.5), (1.0, 1.5, 1, 0.3), (2.0, 6.0, 3, 7.0)],
        [(0.1, 0.2, 6, 15.0), (4.0, 9.0, 2, 40.0), (1.5, 2.5, 8, 0.01)],
        grid,
    )
    worst = max(_rel(*identity_2f2_as_1f1_sum(a, b, n, x, ctrl)) for a, b, n, x in pts)
    return CheckResult("identity-2f2", len(pts), worst, 1e-10)


def check_ncchisq_formulas(grid="default", ctrl=None) -> CheckResult:
    pts = _grid([(2, 4), (4.5, 2), (3, 1.5), (6, 3.5)], [(0.5, 0.0), (1, 30.0), (17, 0.25), (9, 100.0)], grid)
    worst = 0.0
    for g, lam in pts:
        p = NcChiSqParams(g, lam)
        for r in range(1, 9):
            c, s = ncchisq_moment_classic(p, r).value, ncchisq_moment_stirling(p, r).value
            worst = max(worst, _rel(c, s))
            if r <= 4:
                worst = max(worst, _rel(s, ncchisq_moment_closed(p, r)))
    return CheckResult("ncchisq-cross-formula", len(pts) * 8, worst, 1e-12)


_DNCB_DEFAULT = [(0.5, 0.5, 4, 4), (0.5, 0.5, 4, 7), (1, 1, 2, 4), (2, 5, 0.5, 7)]
_DNCB_WIDE = [(0.2, 3.0, 12.0, 0.5), (6.0, 1.5, 0.0, 9.0), (3.0, 3.0, 25.0, 25.0)]


def check_dncb_formulas(grid="default", ctrl=None) -> CheckResult:
    pts = _grid(_DNCB_DEFAULT, _DNCB_WIDE, grid)
    worst = 0.0
    for v in pts:
        p = DNcBParams(*v)
        for r in range(1, 7):
            s = dncb_moment_sum(p, r, ctrl).value
            worst = max(
                worst,
                _rel(s, dncb_moment_one_series(p, r, ctrl).value),
                _rel(s, dncb_moment_double_series(p, r, ctrl).value),
            )
    return CheckResult("dncb-cross-formula", len(pts) * 6, worst, 1e-9)


def check_mean_relationship(grid="default", ctrl=None) -> CheckResult:
    pts = _grid(_DNCB_DEFAULT, _DNCB_WIDE, grid)
    worst = max(_rel(*mean_relationship_check(DNcBParams(*v), ctrl)) for v in pts)
    return CheckResult("mean-relationship", len(pts), worst, 1e-10)


def check_density_representations(grid="default", ctrl=None) -> CheckResult:
    pts = _grid(_DNCB_DEFAULT, _DNCB_WIDE, grid)
    xs = (0.01, 0.25, 0.5, 0.75, 0.99)
    worst = 0.0
    for v in pts:
        p = DNcBParams(*v)
        for x in xs:
            worst = max(worst, _rel(dncb_density_mixture(x, p, ctrl), dncb_density_perturbation(x, p, ctrl)))
    return CheckResult("density-representations", len(pts) * len(xs), worst, 1e-9)


SUITES: tuple[Callable[..., CheckResult], ...] = (
    check_kummer_recurrence,
    check_poch_binomial,
    check_stirling_duality,
    check_identity_2f2,
    check_ncchisq_formulas,
    check_dncb_formulas,
    check_mean_relationship,
    check_density_representations,
)


def run_selfcheck(grid: str = "default", ctrl: SeriesControl | None = None) -> list[CheckResult]:
    if grid not in GRIDS:
        raise ValueError(f"grid must be one of {GRIDS}")
    out = []
    for suite in SUITES:
        try:
            out.append(suite(grid, ctrl))
        except ArithmeticError:
            # a diverging or overflowing suite counts as a failure, not a crash
            out.append(CheckResult(suite.__name__.replace("check_", "").replace("_", "-"), 0, math.inf, 0.0))
    return out
