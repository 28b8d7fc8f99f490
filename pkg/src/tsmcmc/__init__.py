"""Correction and evaluation toolkit for synthetic multivariate time series.

Builds a synthetic counterpart of a real series by filtering conditional
generator proposals through an epsilon-smoothed Metropolis-Hastings
acceptance rule on first-order-difference statistics, and quantifies
fidelity with a six-metric suite.
"""

from .chains import (
    ConditionalModel,
    DiscreteChain,
    ShiftBound,
    build_mh_kernel,
    conditional_shift_bound,
    detailed_balance_gap,
    modified_acceptance_bias,
    stationarity_gap,
    stationary_distribution,
    verification_report,
)
from .core import (
    Normalizer,
    RandomStream,
    TimeSeries,
    accumulate_differences,
    first_differences,
)
from .corrector import (
    CorrectionConfig,
    CorrectionRun,
    MetropolisCorrector,
    acceptance_probability,
    candidate_discrepancy,
    correct_series,
)
from .datasets import (
    LorenzConfig,
    WindowPair,
    load_csv,
    make_windows,
    simulate_lorenz,
    sliding_windows,
    write_csv,
)
from .density import (
    HistogramDiffDensity,
    KdeDiffDensity,
    density_from_dict,
    fit_diff_density,
    load_density,
    save_density,
)
from .external import ExternalSource, ExternalSourceConfig
from .generators import (
    BiasedSource,
    BootstrapSource,
    ProposalSource,
    ReplaySource,
    VarSource,
    fit_var,
    rollout,
)
from .metrics import (
    MetricsConfig,
    MetricsReport,
    PcaProjection,
    acf,
    acf_error,
    discriminative_score,
    evaluate,
    kurtosis_error,
    pca_projection,
    predictive_score,
    r2_score,
    skewness_error,
)

__version__ = "0.1.0"

__all__ = [
    "BiasedSource",
    "BootstrapSource",
    "ConditionalModel",
    "CorrectionConfig",
    "CorrectionRun",
    "DiscreteChain",
    "ExternalSource",
    "ExternalSourceConfig",
    "HistogramDiffDensity",
    "KdeDiffDensity",
    "LorenzConfig",
    "MetricsConfig",
    "MetricsReport",
    "MetropolisCorrector",
    "Normalizer",
    "PcaProjection",
    "ProposalSource",
    "RandomStream",
    "ReplaySource",
    "ShiftBound",
    "TimeSeries",
    "VarSource",
    "WindowPair",
    "accumulate_differences",
    "acceptance_probability",
    "acf",
    "acf_error",
    "build_mh_kernel",
    "candidate_discrepancy",
    "conditional_shift_bound",
    "correct_series",
    "density_from_dict",
    "detailed_balance_gap",
    "discriminative_score",
    "evaluate",
    "first_differences",
    "fit_diff_density",
    "fit_var",
    "kurtosis_error",
    "load_csv",
    "load_density",
    "make_windows",
    "modified_acceptance_bias",
    "pca_projection",
    "predictive_score",
    "r2_score",
    "rollout",
    "save_density",
    "simulate_lorenz",
    "skewness_error",
    "sliding_windows",
    "stationarity_gap",
    "stationary_distribution",
    "verification_report",
    "write_csv",
]
