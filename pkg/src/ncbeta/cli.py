"""Command-line interface: ``ncbeta <command> [options]``.

Every command writes one table (CSV or JSON) and exits with 0 on
success, 1 on a statistical or invariant rejection and 2 on a usage or
domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import platform
import sys

import numpy as np
import scipy
from scipy.stats import chi2, ncx2

from . import __version__
from .density import DENSITY_REPRESENTATIONS, dncb_density_mixture
from .errors import NcBetaError
from .moments import (
    DNcBParams,
    NcChiSqParams,
    dncb_moment_double_series,
    dncb_moment_one_series,
    dncb_moment_sum,
    ncchisq_moment,
    ncchisq_moment_classic,
    ncchisq_moment_stirling,
    ncchisq_moment_zero_df,
)
from .sampling import RngStream, sample_dncb_many, sample_ncchisq_additive, sample_ncchisq_mixture
from .selfcheck import GRIDS, run_selfcheck
from .special import SeriesControl
from .validation import (
    REFERENCE_DNCB_VECTORS,
    REFERENCE_NCCHISQ_VECTORS,
    Model,
    ValidationConfig,
    run_moment_validation,
    run_timing_benchmark,
)

DEFAULT_SEED = ValidationConfig.seed


class UsageError(Exception):
    """Bad flag value; the message names the flag."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one-line diagnostic instead of argparse's usage block
        self.exit(2, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Flag value types
# ---------------------------------------------------------------------------


def _float(lo=None, strict=False):
    def conv(s):
        try:
            v = float(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {s!r}") from None
        if not math.isfinite(v):
            raise argparse.ArgumentTypeError(f"must be finite, got {s!r}")
        if lo is not None and (v <= lo if strict else v < lo):
            raise argparse.ArgumentTypeError(f"must be {'>' if strict else '>='} {lo}, got {s!r}")
        return v

    return conv


def _int(lo=None, hi=None):
    def conv(s):
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise argparse.ArgumentTypeError(f"must lie in {lo}..{hi if hi is not None else ''}, got {s!r}")
        return v

    return conv


def parse_orders(s: str, hi: int = 32) -> tuple[int, ...]:
    """``"3"``, ``"1..4"`` or ``"1,3,5"``."""
    try:
        if ".." in s:
            lo_s, hi_s = s.split("..", 1)
            out = tuple(range(int(lo_s), int(hi_s) + 1))
        else:
            out = tuple(int(t) for t in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N, A..B or A,B,...; got {s!r}") from None
    if not out or any(not 1 <= r <= hi for r in out):
        raise argparse.ArgumentTypeError(f"orders must lie in 1..{hi}, got {s!r}")
    return out


def _vector(s: str) -> tuple[float, ...]:
    try:
        v = tuple(float(t) for t in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None
    if not all(math.isfinite(t) for t in v):
        raise argparse.ArgumentTypeError(f"non-finite entry in {s!r}")
    return v


_seed = _int(0, (1 << 64) - 1)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def format_number(v, precision: int) -> str:
    """Fixed decimals, or scientific when fixed would print no significant digit."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    fixed = f"{v:.{precision}f}"
    if v != 0 and float(fixed) == 0:
        return f"{v:.{precision}e}"
    return fixed


def _cell(v, precision):
    if isinstance(v, str):
        return v
    return format_number(v, precision)


def _json_value(v, precision):
    if isinstance(v, str) or v is None:
        return v
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    v = float(v)
    if not math.isfinite(v):
        return format_number(v, precision)
    return float(format_number(v, precision))


def render(command: str, columns, rows, fmt: str, precision: int, seed) -> str:
    if fmt == "json":
        doc = {
            "meta": {
                "command": command,
                "seed": seed,
                "versions": {
                    "ncbeta": __version__,
                    "numpy": np.__version__,
                    "scipy": scipy.__version__,
                    "python": platform.python_version(),
                },
            },
            "rows": [{c: _json_value(v, precision) for c, v in zip(columns, row)} for row in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v, precision) for v in row])
    return buf.getvalue()


def _emit(args, columns, rows):
    text = render(args.command, columns, rows, args.format, args.precision, args.seed)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Parameter assembly
# ---------------------------------------------------------------------------


def _ncchisq_from_flags(args) -> NcChiSqParams:
    if args.g is None or args.l is None:
        raise UsageError("--model ncchisq needs -g and -l")
    return NcChiSqParams(args.g, args.l)


def _dncb_from_flags(args) -> DNcBParams:
    if args.a is None or args.b is None:
        raise UsageError(f"--model {args.model} needs -a and -b")
    l1 = args.l1 if args.l1 is not None else 0.0
    l2 = args.l2 if args.l2 is not None else 0.0
    if args.l is not None:
        # -l is the single non-centrality of the one-sided models
        if args.model == "ncb1":
            l1 = args.l
        elif args.model == "ncb2":
            l2 = args.l
        else:
            raise UsageError(f"-l is not used by --model {args.model}; give --l1 and --l2")
    if args.model == "ncb1" and l2 != 0:
        raise UsageError("--l2 must be 0 for --model ncb1")
    if args.model == "ncb2" and l1 != 0:
        raise UsageError("--l1 must be 0 for --model ncb2")
    return DNcBParams(args.a, args.b, l1, l2)


def _vectors(args, model: Model):
    if not args.vector:
        return list(REFERENCE_NCCHISQ_VECTORS if model is Model.NCCHISQ else REFERENCE_DNCB_VECTORS)
    want = 2 if model is Model.NCCHISQ else 4
    out = []
    for v in args.vector:
        if len(v) != want:
            raise UsageError(f"--vector needs {want} comma-separated values for {model}, got {len(v)}")
        try:
            out.append(NcChiSqParams(*v) if want == 2 else DNcBParams(*v))
        except NcBetaError as exc:
            raise UsageError(f"--vector {','.join(map(str, v))}: {exc}") from None
    return out


def _param_columns(model: str):
    return ["g", "lambda"] if model == "ncchisq" else ["alpha1", "alpha2", "lambda1", "lambda2"]


def _param_values(p):
    return [p.g, p.lam] if isinstance(p, NcChiSqParams) else list(p.as_tuple())


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

_NCCHISQ_METHODS = {
    "auto": lambda p, r, ctrl: ncchisq_moment(p, r),
    "classic": lambda p, r, ctrl: ncchisq_moment_classic(p, r),
    "stirling": lambda p, r, ctrl: ncchisq_moment_stirling(p, r),
    "zero-df": lambda p, r, ctrl: ncchisq_moment_zero_df(p.lam, r),
}
_DNCB_METHODS = {
    "auto": dncb_moment_sum,
    "sum": dncb_moment_sum,
    "one-series": dncb_moment_one_series,
    "double-series": dncb_moment_double_series,
}


def cmd_moments(args, ctrl) -> int:
    if args.model == "ncchisq":
        p = _ncchisq_from_flags(args)
        table = _NCCHISQ_METHODS
        if args.method == "zero-df" and p.g != 0:
            raise UsageError("--method zero-df needs -g 0")
        if args.method in ("classic", "stirling") and p.g == 0:
            raise UsageError(f"--method {args.method} needs -g > 0")
    else:
        p = _dncb_from_flags(args)
        table = _DNCB_METHODS
    if args.method not in table:
        raise UsageError(f"--method {args.method} is not available for --model {args.model}")
    fn = table[args.method]
    model = "ncchisq" if args.model == "ncchisq" else "dncb"
    rows = []
    for r in args.r:
        res = fn(p, r, ctrl)
        rows.append(_param_values(p) + [res.order, res.value, str(res.method), res.terms_used])
    _emit(args, _param_columns(model) + ["r", "moment", "method", "terms_used"], rows)
    return 0


def _density_grid(n: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, n + 2)[1:-1]


def cmd_density(args, ctrl) -> int:
    p = _dncb_from_flags(args)
    reps = list(DENSITY_REPRESENTATIONS) if args.representation == "both" else [args.representation]
    rows = []
    for x in _density_grid(args.grid):
        rows.append([float(x)] + [DENSITY_REPRESENTATIONS[k](x, p, ctrl) for k in reps])
    _emit(args, ["x"] + [f"density_{k}" for k in reps], rows)
    return 0


def _simulate_draws(args, rng):
    if args.model == "ncchisq":
        p = _ncchisq_from_flags(args)
        sampler = sample_ncchisq_mixture if p.g > 0 else sample_ncchisq_additive
        return p, np.asarray(sampler(p, rng, args.draws), dtype=float)
    p = _dncb_from_flags(args)
    return p, sample_dncb_many(p, rng, args.draws)[0]


def cmd_simulate(args, ctrl) -> int:
    rng = RngStream(args.seed, 0)
    p, x = _simulate_draws(args, rng)
    if args.bins == 0:
        _emit(args, ["draw", "x"], [[i, float(v)] for i, v in enumerate(x)])
        return 0
    if isinstance(p, DNcBParams):
        lo, hi = 0.0, 1.0
    else:
        lo, hi = 0.0, float(x.max()) if x.size and x.max() > 0 else 1.0
    counts, edges = np.histogram(x, bins=args.bins, range=(lo, hi))
    dens, _ = np.histogram(x, bins=args.bins, range=(lo, hi), density=True)
    mids = 0.5 * (edges[:-1] + edges[1:])
    if isinstance(p, DNcBParams):
        overlay = [dncb_density_mixture(m, p, ctrl) for m in mids]
    elif p.g > 0:
        overlay = ncx2.pdf(mids, p.g, p.lam) if p.lam > 0 else chi2.pdf(mids, p.g)
    else:
        # g = 0 has an atom at zero; there is no density to overlay
        overlay = [math.nan] * len(mids)
    rows = [
        [float(edges[i]), float(edges[i + 1]), float(mids[i]), int(counts[i]), float(dens[i]), float(overlay[i])]
        for i in range(len(mids))
    ]
    _emit(args, ["bin_lo", "bin_hi", "bin_mid", "count", "hist_density", "true_density"], rows)
    return 0


def _config(args) -> ValidationConfig:
    try:
        return ValidationConfig(
            n_series=args.n_series,
            draws_per_series=getattr(args, "draws", 10_000),
            orders=getattr(args, "orders", (1, 2, 3, 4)),
            alpha_level=args.alpha,
            seed=args.seed,
        )
    except NcBetaError as exc:
        raise UsageError(f"--n-series/--draws/--alpha: {exc}") from None


def cmd_validate(args, ctrl) -> int:
    cfg = _config(args)
    models = [Model.NCCHISQ, Model.DNCB] if args.model == "both" else [Model(args.model)]
    if args.vector and len(models) > 1:
        raise UsageError("--vector needs --model ncchisq or --model dncb")
    out_rows = []
    ok = True
    for model in models:
        rep = run_moment_validation(model, _vectors(args, model), cfg, workers=args.workers, mu0_scale=args.mu0_scale)
        ok &= rep.all_pass
        for row in rep.rows:
            params = list(row.params) + [""] * (4 - len(row.params))
            out_rows.append([str(model)] + params + [row.r, row.theoretical, row.mean, row.sd, row.z, row.p_value])
    cols = ["model", "param1", "param2", "param3", "param4", "r", "moment", "mean", "sd", "z", "p_value"]
    _emit(args, cols, out_rows)
    return 0 if ok else 1


def cmd_bench(args, ctrl) -> int:
    cfg = _config(args)
    rep = run_timing_benchmark(_vectors(args, Model.DNCB), cfg, warmup=args.warmup)
    rows = []
    for row in rep.rows:
        base = list(row.params)
        rows.append(base + ["Sum", row.mean_time_sum, row.sd_time_sum, row.z, row.p_value, row.speedup, rep.published_speedup])
        rows.append(base + ["Series", row.mean_time_series, row.sd_time_series, "", "", "", ""])
    cols = ["alpha1", "alpha2", "lambda1", "lambda2", "formula", "mean_time", "sd_time", "z", "p_value", "speedup", "published_speedup"]
    _emit(args, cols, rows)
    return 0 if rep.all_pass else 1


def cmd_selfcheck(args, ctrl) -> int:
    results = run_selfcheck(args.grid, ctrl)
    rows = [[r.suite, r.cases, r.max_error, r.tolerance, "pass" if r.passed else "fail"] for r in results]
    _emit(args, ["suite", "cases", "max_error", "tolerance", "status"], rows)
    failed = [r for r in results if not r.passed]
    if failed:
        r = failed[0]
        print(f"selfcheck: invariant '{r.suite}' failed (max error {r.max_error:.3e} > {r.tolerance:.1e})", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "moments": cmd_moments,
    "density": cmd_density,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "bench": cmd_bench,
    "selfcheck": cmd_selfcheck,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_globals(p, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"), help="output format (default csv)")
    p.add_argument("--out", default=d(None), metavar="PATH", help="output file (default stdout)")
    p.add_argument("--seed", type=_seed, default=d(DEFAULT_SEED), metavar="U64", help=f"RNG seed (default {DEFAULT_SEED})")
    p.add_argument("--precision", type=_int(1, 17), default=d(5), metavar="N", help="decimal digits, 1..17 (default 5)")


def _add_params(p, models):
    p.add_argument("--model", choices=models, default=models[0])
    p.add_argument("-g", type=_float(0), help="chi-squared degrees of freedom")
    p.add_argument("-l", type=_float(0), help="chi-squared non-centrality; also the ncb1/ncb2 non-centrality")
    p.add_argument("-a", type=_float(0, strict=True), help="alpha1")
    p.add_argument("-b", type=_float(0, strict=True), help="alpha2")
    p.add_argument("--l1", type=_float(0), help="lambda1")
    p.add_argument("--l2", type=_float(0), help="lambda2")


def _add_config(p, sampling=True):
    p.add_argument("--n-series", type=_int(1), default=30)
    if sampling:
        p.add_argument("--draws", type=_int(1), default=10_000, help="draws per series")
        p.add_argument("--orders", type=parse_orders, default=(1, 2, 3, 4), help="moment orders, e.g. 1..4")
    p.add_argument("--alpha", type=_float(0, strict=True), default=0.01, help="significance level")
    p.add_argument("--vector", type=_vector, action="append", help="parameter vector, e.g. 0.5,0.5,4,4 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncbeta", description="Moments, densities and simulation for non-central chi-squared and beta laws.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("moments", help="raw moments")
    _add_globals(p, suppress=True)
    _add_params(p, ["ncchisq", "dncb", "ncb1", "ncb2"])
    p.add_argument("-r", type=parse_orders, default=(1, 2, 3, 4), help="orders: N, A..B or A,B (default 1..4)")
    p.add_argument("--method", default="auto", choices=sorted(set(_NCCHISQ_METHODS) | set(_DNCB_METHODS)))

    p = sub.add_parser("density", help="DNcB density on an interior grid")
    _add_globals(p, suppress=True)
    _add_params(p, ["dncb", "ncb1", "ncb2"])
    p.add_argument("--grid", type=_int(2), default=401, help="number of interior points (default 401)")
    p.add_argument("--representation", choices=("mixture", "perturbation", "both"), default="mixture")

    p = sub.add_parser("simulate", help="random draws or a histogram with the true density")
    _add_globals(p, suppress=True)
    _add_params(p, ["dncb", "ncb1", "ncb2", "ncchisq"])
    p.add_argument("--draws", type=_int(1), default=10_000)
    p.add_argument("--bins", type=_int(0), default=50, help="histogram bins; 0 writes raw draws")

    p = sub.add_parser("validate", help="Monte-Carlo Z tests of the moment formulas")
    _add_globals(p, suppress=True)
    p.add_argument("--model", choices=("both", "ncchisq", "dncb"), default="both")
    _add_config(p)
    p.add_argument("--workers", type=_int(1), default=1)
    p.add_argument("--mu0-scale", type=_float(), default=1.0, help="multiply theoretical moments (power check)")

    p = sub.add_parser("bench", help="time the finite-sum against the one-series formula")
    _add_globals(p, suppress=True)
    _add_config(p, sampling=False)
    p.add_argument("--warmup", type=_int(0), default=3)

    p = sub.add_parser("selfcheck", help="run the invariant suites")
    _add_globals(p, suppress=True)
    p.add_argument("--grid", choices=GRIDS, default="default")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ctrl = SeriesControl.from_env()
    except NcBetaError as exc:
        print(f"ncbeta: error: NCB_MAX_TERMS: {exc}", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args, ctrl)
    except UsageError as exc:
        print(f"ncbeta {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (NcBetaError, ArithmeticError) as exc:
        print(f"ncbeta {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ncbeta {args.command}: error: --out: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
