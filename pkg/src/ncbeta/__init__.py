"""Moments, densities and simulation for non-central chi-squared and beta laws."""

__version__ = "0.1.0"

from .errors import (
    BenchmarkMismatch,
    DegenerateParameter,
    EmptySample,
    InvalidParameter,
    NcBetaError,
    NonConvergence,
    OrderOutOfRange,
    ZeroVariance,
)
from .special import (
    SeriesControl,
    humbert_psi2,
    hyp_2f2,
    hyp_pfq,
    kummer_1f1,
    kummer_1f1_scaled,
    kummer_recurrence_residuals,
    poch_binomial_expansion,
    pochhammer,
    rising_poly,
    stirling_first_unsigned,
    stirling_second,
)
from .moments import (
    DNcBParams,
    Method,
    MomentResult,
    NcChiSqParams,
    dncb_mean_reduced,
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
    ncchisq_moment_stirling,
    ncchisq_moment_zero_df,
)
from .sampling import LatentCounts, RngStream, sample_dncb, sample_ncchisq_additive, sample_ncchisq_mixture
from .density import dncb_density_mixture, dncb_density_perturbation, ncb1_density
from .validation import ValidationConfig, run_moment_validation, run_timing_benchmark
