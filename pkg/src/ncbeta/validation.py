"""Monte-Carlo moment validation and the Sum-vs-Series timing benchmark.

The validation protocol draws ``n_series`` independent series of
``draws_per_series`` variates, computes the descriptive moments of each
series, and tests the mean of those against the theoretical moment with
a two-tailed large-sample Z test.  The benchmark times the finite-sum
and the one-series DNcB formulas over repeated batches of moments and
compares the two arms with a one-tailed Z test.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import BenchmarkMismatch, EmptySample, InvalidParameter, ZeroVariance
from .moments import (
    DNcBParams,
    NcChiSqParams,
    dncb_moment_one_series,
    dncb_moment_sum,
    ncchisq_moment,
)
from .sampling import RngStream, sample_dncb_many, sample_ncchisq_additive, sample_ncchisq_mixture

MIN_SERIES_FOR_Z = 30
PUBLISHED_SPEEDUP = 5.0

REFERENCE_NCCHISQ_VECTORS = ((2.0, 4.0), (4.5, 2.0), (3.0, 1.5), (6.0, 3.5))
REFERENCE_DNCB_VECTORS = (
    (0.5, 0.5, 4.0, 4.0),
    (0.5, 0.5, 4.0, 7.0),
    (1.0, 1.0, 2.0, 4.0),
    (2.0, 5.0, 0.5, 7.0),
)


class Model(str, enum.Enum):
    NCCHISQ = "ncchisq"
    DNCB = "dncb"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ValidationConfig:
    n_series: int = 30
    draws_per_series: int = 10_000
    orders: tuple[int, ...] = (1, 2, 3, 4)
    alpha_level: float = 0.01
    seed: int = 20_190_417

    def __post_init__(self):
        if self.n_series < MIN_SERIES_FOR_Z:
            raise InvalidParameter(f"the large-sample Z test needs n_series >= {MIN_SERIES_FOR_Z}")
        if self.draws_per_series < 1:
            raise InvalidParameter("draws_per_series must be positive")
        if not self.orders or any(int(r) != r or r < 1 for r in self.orders):
            raise InvalidParameter("orders must be positive integers")
        if not 0 < self.alpha_level < 1:
            raise InvalidParameter("alpha_level must lie in (0, 1)")
        if int(self.seed) != self.seed or not 0 <= self.seed < 1 << 64:
            raise InvalidParameter("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "orders", tuple(int(r) for r in self.orders))


@dataclass(frozen=True)
class ValidationRow:
    params: tuple[float, ...]
    r: int
    theoretical: float
    mean: float
    sd: float
    z: float
    p_value: float


@dataclass(frozen=True)
class ValidationReport:
    model: Model
    config: ValidationConfig
    rows: tuple[ValidationRow, ...]

    @property
    def all_pass(self) -> bool:
        return all(row.p_value > self.config.alpha_level for row in self.rows)


@dataclass(frozen=True)
class TimingRow:
    params: tuple[float, ...]
    mean_time_sum: float
    sd_time_sum: float
    mean_time_series: float
    sd_time_series: float
    z: float
    p_value: float
    speedup: float
    max_rel_diff: float


@dataclass(frozen=True)
class TimingReport:
    config: ValidationConfig
    rows: tuple[TimingRow, ...]
    published_speedup: float = PUBLISHED_SPEEDUP

    @property
    def all_pass(self) -> bool:
        return all(row.p_value < self.config.alpha_level for row in self.rows)


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


def descriptive_moment(samples, r: int) -> float:
    """``(1/N) sum x_i^r``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptySample("descriptive moment of an empty sample")
    return float(np.mean(x**r))


def _two_tailed_p(z: float) -> float:
    return min(1.0, 2.0 * float(ndtr(-abs(z))))


def z_two_tailed_from_summary(mean: float, sd: float, n: int, mu0: float) -> tuple[float, float]:
    """Two-tailed Z statistic and p-value from a sample summary."""
    if n < MIN_SERIES_FOR_Z:
        raise InvalidParameter(f"Z test needs at least {MIN_SERIES_FOR_Z} values, got {n}")
    diff = mean - mu0
    if sd == 0:
        if diff == 0:
            return 0.0, 1.0
        raise ZeroVariance("sample standard deviation is zero")
    z = diff / (sd / math.sqrt(n))
    return z, _two_tailed_p(z)


def z_test_two_tailed(values, mu0: float) -> tuple[float, float]:
    """Large-sample Z test of ``H0: mean = mu0``.

    Uses the sample standard deviation (n - 1 denominator) and returns
    ``(z, p)`` with ``p = 2 (1 - Phi(|z|))``.
    """
    x = np.asarray(values, dtype=float)
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    return z_two_tailed_from_summary(float(np.mean(x)) if x.size else math.nan, sd, x.size, mu0)


def z_one_tailed_from_summary(mean_a, sd_a, mean_b, sd_b, n: int) -> tuple[float, float]:
    """One-tailed two-sample Z from summaries, ``H0: mu_a - mu_b >= 0``."""
    if n < MIN_SERIES_FOR_Z:
        raise InvalidParameter(f"Z test needs at least {MIN_SERIES_FOR_Z} values per arm, got {n}")
    se = math.sqrt((sd_a**2 + sd_b**2) / n)
    if se == 0:
        raise ZeroVariance("both samples have zero variance")
    z = (mean_a - mean_b) / se
    return z, float(ndtr(z))


def z_test_one_tailed_nonsuperiority(a, b) -> tuple[float, float]:
    """One-tailed test of ``H0: mu_a - mu_b >= 0`` against ``mu_a < mu_b``.

    Unpooled standard error ``sqrt(s_a^2/n + s_b^2/n)``; ``p = Phi(z)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise InvalidParameter("samples must have equal length")
    if a.size < MIN_SERIES_FOR_Z:
        raise InvalidParameter(f"Z test needs at least {MIN_SERIES_FOR_Z} values per arm, got {a.size}")
    return z_one_tailed_from_summary(
        float(a.mean()), float(np.std(a, ddof=1)), float(b.mean()), float(np.std(b, ddof=1)), a.size
    )


# ---------------------------------------------------------------------------
# Moment validation
# ---------------------------------------------------------------------------


def _coerce_params(model: Model, params) -> list:
    out = []
    for p in params:
        if isinstance(p, (NcChiSqParams, DNcBParams)):
            out.append(p)
        elif model is Model.NCCHISQ:
            out.append(NcChiSqParams(*p))
        else:
            out.append(DNcBParams(*p))
    return out


def _param_tuple(p) -> tuple[float, ...]:
    if isinstance(p, NcChiSqParams):
        return (p.g, p.lam)
    return p.as_tuple()


def _draw(p, rng: RngStream, n: int) -> np.ndarray:
    if isinstance(p, DNcBParams):
        return sample_dncb_many(p, rng, n)[0]
    if p.g == 0:
        return sample_ncchisq_additive(p, rng, n)
    return sample_ncchisq_mixture(p, rng, n)


def _theoretical(p, r: int) -> float:
    if isinstance(p, DNcBParams):
        return dncb_moment_sum(p, r).value
    return ncchisq_moment(p, r).value


def series_moments(p, cfg: ValidationConfig, vector_index: int = 0, workers: int = 1) -> np.ndarray:
    """Descriptive moments, shape ``(n_series, len(orders))``.

    Series ``s`` of vector ``v`` draws from stream ``(v << 32) | s`` of
    ``cfg.seed``, so the result does not depend on ``workers``.
    """
    orders = np.asarray(cfg.orders)

    def one(s):
        rng = RngStream(cfg.seed, (vector_index << 32) | s)
        x = _draw(p, rng, cfg.draws_per_series)
        return [descriptive_moment(x, r) for r in orders]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, range(cfg.n_series)))
    else:
        rows = [one(s) for s in range(cfg.n_series)]
    return np.asarray(rows)


def run_moment_validation(
    model: Model | str,
    params: Sequence,
    cfg: ValidationConfig | None = None,
    *,
    workers: int = 1,
    mu0_scale: float = 1.0,
) -> ValidationReport:
    """Simulate, then Z-test each descriptive moment against its formula.

    ``mu0_scale`` multiplies every theoretical moment before testing; it
    exists only to check that the harness can reject.
    """
    model = Model(model)
    cfg = cfg or ValidationConfig()
    rows = []
    for v, p in enumerate(_coerce_params(model, params)):
        moments = series_moments(p, cfg, v, workers)
        for k, r in enumerate(cfg.orders):
            mu0 = _theoretical(p, r) * mu0_scale
            col = moments[:, k]
            z, pval = z_test_two_tailed(col, mu0)
            rows.append(
                ValidationRow(
                    params=_param_tuple(p),
                    r=r,
                    theoretical=mu0,
                    mean=float(col.mean()),
                    sd=float(col.std(ddof=1)),
                    z=z,
                    p_value=pval,
                )
            )
    return ValidationReport(model, cfg, tuple(rows))


# ---------------------------------------------------------------------------
# Timing benchmark
# ---------------------------------------------------------------------------

MomentFn = Callable[[DNcBParams, int], float]


def _sum_arm(p: DNcBParams, r: int) -> float:
    return dncb_moment_sum(p, r).value


def _series_arm(p: DNcBParams, r: int) -> float:
    return dncb_moment_one_series(p, r).value


def _timed(fn: MomentFn, p, orders, timer):
    t0 = timer()
    vals = [fn(p, r) for r in orders]
    return timer() - t0, vals


def run_timing_benchmark(
    params: Sequence,
    cfg: ValidationConfig | None = None,
    *,
    sum_fn: MomentFn = _sum_arm,
    series_fn: MomentFn = _series_arm,
    timer: Callable[[], float] = time.perf_counter,
    warmup: int = 3,
    agreement_rtol: float = 1e-9,
) -> TimingReport:
    """Time the finite-sum ("Sum") and one-series ("Series") arms.

    Each repetition computes all of ``cfg.orders`` with both arms, in
    alternating order, on the calling thread.  ``warmup`` unmeasured
    repetitions run first.  Raises :class:`BenchmarkMismatch` when the
    arms disagree by more than ``agreement_rtol``.
    """
    cfg = cfg or ValidationConfig()
    rows = []
    for p in _coerce_params(Model.DNCB, params):
        for _ in range(warmup):
            sum_fn(p, cfg.orders[0])
            series_fn(p, cfg.orders[0])
        t_sum, t_series = [], []
        worst = 0.0
        for rep in range(cfg.n_series):
            if rep % 2 == 0:
                ts, vs = _timed(sum_fn, p, cfg.orders, timer)
                tq, vq = _timed(series_fn, p, cfg.orders, timer)
            else:
                tq, vq = _timed(series_fn, p, cfg.orders, timer)
                ts, vs = _timed(sum_fn, p, cfg.orders, timer)
            t_sum.append(ts)
            t_series.append(tq)
            for a, b in zip(vs, vq):
                rel = abs(a - b) / max(abs(a), abs(b), 1e-300)
                worst = max(worst, rel)
        if worst > agreement_rtol:
            raise BenchmarkMismatch(f"Sum and Series arms differ by {worst:.3e} at {p.as_tuple()}")
        ms, mq = float(np.mean(t_sum)), float(np.mean(t_series))
        try:
            z, pval = z_test_one_tailed_nonsuperiority(t_sum, t_series)
        except ZeroVariance:
            # constant timings (coarse clock): the sign of the difference decides
            z = math.copysign(math.inf, ms - mq) if ms != mq else 0.0
            pval = float(ndtr(z))
        rows.append(
            TimingRow(
                params=p.as_tuple(),
                mean_time_sum=ms,
                sd_time_sum=float(np.std(t_sum, ddof=1)),
                mean_time_series=mq,
                sd_time_series=float(np.std(t_series, ddof=1)),
                z=z,
                p_value=pval,
                speedup=mq / ms if ms > 0 else math.inf,
                max_rel_diff=worst,
            )
        )
    return TimingReport(cfg, tuple(rows))
