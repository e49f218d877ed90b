"""Deformed log-Normal distributions built on a deformed product algebra.

The package covers the algebra primitives (q_log, q_exp, q_product),
the distribution family (density, distribution function, quantiles,
moments, characteristic function), exact random-variate generation,
multiplicative cascade simulation, maximum-likelihood fitting with AIC
model comparison, and Monte Carlo Kolmogorov-Smirnov quantile tables.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DataError,
    DivergenceError,
    DomainError,
    QlognormError,
)
from .qalgebra import (
    Q_CLASSICAL_EPS,
    QProductOutcome,
    Region,
    q_divide,
    q_exp,
    q_log,
    q_product,
    q_product_n,
)
from .specfun import QuadratureResult, erf, erf_inv, erfc, gamma_fn, integrate_adaptive, pcf_D
from .dist import (
    MixtureParams,
    MomentSpec,
    QParams,
    Side,
    TruncatedNormalParams,
    cdf,
    char_fn,
    char_fn_series,
    log_pdf,
    mixture_cdf,
    mixture_pdf,
    moment_spec,
    normalization,
    pdf,
    quantile,
    raw_moment,
    truncnorm_char_fn,
    truncnorm_from_q,
    truncnorm_pdf,
)
from .sample import (
    CascadeConfig,
    QLogNormalBase,
    RngStream,
    UniformBase,
    cascade_run,
    compact_image_pdf,
    compact_image_variance,
    hill_tail_estimate,
    levy_alpha,
    sample_mixture,
    sample_qlognormal,
    sample_truncnorm,
)
from .infer import (
    MODELS,
    FitReport,
    KSTable,
    PValueBracket,
    aic,
    empirical_cdf_rss,
    fit_gamma,
    fit_mle,
    ks_distance,
    ks_pvalue_lookup,
    ks_table_generate,
    log_likelihood,
    score_gradient,
)

__all__ = [
    "__version__",
    "QlognormError",
    "DomainError",
    "DataError",
    "ConvergenceError",
    "DivergenceError",
    "Q_CLASSICAL_EPS",
    "Region",
    "QProductOutcome",
    "q_log",
    "q_exp",
    "q_product",
    "q_divide",
    "q_product_n",
    "QuadratureResult",
    "erf",
    "erfc",
    "erf_inv",
    "gamma_fn",
    "pcf_D",
    "integrate_adaptive",
    "QParams",
    "Side",
    "TruncatedNormalParams",
    "MixtureParams",
    "MomentSpec",
    "moment_spec",
    "normalization",
    "pdf",
    "log_pdf",
    "cdf",
    "quantile",
    "raw_moment",
    "char_fn",
    "char_fn_series",
    "mixture_pdf",
    "mixture_cdf",
    "truncnorm_from_q",
    "truncnorm_pdf",
    "truncnorm_char_fn",
    "RngStream",
    "UniformBase",
    "QLogNormalBase",
    "CascadeConfig",
    "sample_truncnorm",
    "sample_qlognormal",
    "sample_mixture",
    "cascade_run",
    "compact_image_pdf",
    "compact_image_variance",
    "levy_alpha",
    "hill_tail_estimate",
    "FitReport",
    "KSTable",
    "PValueBracket",
    "log_likelihood",
    "MODELS",
    "fit_mle",
    "fit_gamma",
    "score_gradient",
    "aic",
    "empirical_cdf_rss",
    "ks_distance",
    "ks_table_generate",
    "ks_pvalue_lookup",
]
