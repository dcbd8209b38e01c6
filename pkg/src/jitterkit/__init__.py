"""jitterkit: nonparametric estimation for mixed discrete-continuous data.

Discrete variables are made continuous by adding noise whose density is 1
in a neighborhood of zero and 0 outside (-1, 1). Under those conditions
the noisy ("jittered") vector has the same density as the original at
every integer point, so continuous-data estimators (kernel density,
local linear regression) apply unchanged, and conditional means, CDFs,
quantiles and class probabilities of the original data can be read off
the jittered density.
"""

from .data import (
    ColumnSchema,
    JitteredDataset,
    MixedDataset,
    Standardization,
    dummy_code,
    jitter,
    load_csv,
    standardize,
    write_csv,
)
from .errors import (
    DegenerateColumnError,
    IngestionError,
    InsufficientDataError,
    InvalidParameterError,
    JitterkitError,
    NoLocalDataError,
    NumericalError,
    QuantileSearchError,
    SchemaError,
    UndefinedConditionalError,
)
from .estimators import (
    EPANECHNIKOV,
    GAUSSIAN,
    KdeModel,
    Kernel,
    LocLinModel,
    fit_kde,
    fit_loclin,
    get_kernel,
    kde_eval,
    load_model,
    loclin_eval,
    save_model,
    select_bandwidth,
)
from .noise import (
    NoiseReport,
    NoiseSpec,
    beta_cdf,
    eta_density,
    noise_stream,
    sample_noise,
    verify_membership,
)
from .oracle import (
    AnalyticJitteredDensity,
    DiscretePmf,
    GaussianConditional,
    SyntheticMixedModel,
    convolve_density,
    finite_difference,
    model_from_config,
    sample_model,
    true_conditional,
)
from .quadrature import adaptive_integral
from .regression import (
    ConditionalEstimate,
    FunctionalQuery,
    ResponseSlice,
    classify,
    cond_cdf,
    cond_mean,
    cond_quantile,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyticJitteredDensity",
    "ColumnSchema",
    "ConditionalEstimate",
    "DegenerateColumnError",
    "DiscretePmf",
    "EPANECHNIKOV",
    "FunctionalQuery",
    "GAUSSIAN",
    "GaussianConditional",
    "IngestionError",
    "InsufficientDataError",
    "InvalidParameterError",
    "JitteredDataset",
    "JitterkitError",
    "KdeModel",
    "Kernel",
    "LocLinModel",
    "MixedDataset",
    "NoLocalDataError",
    "NoiseReport",
    "NoiseSpec",
    "NumericalError",
    "QuantileSearchError",
    "ResponseSlice",
    "SchemaError",
    "Standardization",
    "SyntheticMixedModel",
    "UndefinedConditionalError",
    "adaptive_integral",
    "beta_cdf",
    "classify",
    "cond_cdf",
    "cond_mean",
    "cond_quantile",
    "convolve_density",
    "dummy_code",
    "eta_density",
    "finite_difference",
    "fit_kde",
    "fit_loclin",
    "get_kernel",
    "jitter",
    "kde_eval",
    "load_csv",
    "load_model",
    "loclin_eval",
    "model_from_config",
    "noise_stream",
    "sample_model",
    "sample_noise",
    "save_model",
    "select_bandwidth",
    "standardize",
    "true_conditional",
    "verify_membership",
    "write_csv",
]
