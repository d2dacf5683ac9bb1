"""Robust low-tubal-rank tensor completion for radio maps and localization."""

from . import errors
from .errors import (
    BadFile, DimensionMismatch, EmptyComplement, EmptyInput, KTooLarge,
    NonRealResult, RankTooLarge, ShapeMismatch, TubalmapError, ZeroDenominator,
)
from .completion import (
    METHODS, IterationRecord, SolverConfig, SolverResult, SolverState,
    default_lam, default_penalty, singular_value_threshold, soft_threshold,
    solve, update_duals, update_x, update_y, update_z,
)
from .experiments import (
    ExperimentReport, run_fig1_study, run_localization_eval,
    run_recovery_curve,
)
from .localization import (
    LocationEstimate, RadioMap, cdf_percentile, error_cdf, knn_localize,
    localization_error, nse,
)
from .sampling import (
    AnomalySpec, SampleMask, SynthTensor, anomaly_tube_support, apply_mask,
    generate_low_tubal_rank, inject_anomalies, sample_uniform_tubes,
)
from .talgebra import (
    TSvdFactors, dft_mode3, identity_tensor, idft_mode3, norm_112,
    spectral_singular_values, t_product, t_svd, t_transpose, tnn, tubal_rank,
)
from .tensorfile import read_mask, read_tensor, write_mask, write_tensor

__version__ = "0.1.0"
