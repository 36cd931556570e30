"""Moment-based lower bounds on the Kullback-Leibler divergence."""

from ._kernels import BACKEND
from .bound import (
    BoundResult,
    EqualityReport,
    Regime,
    equality_condition_check,
    hcrb_chi2_lower_bound,
    hellinger_lower_bound,
    kl_lower_bound,
    kl_lower_bound_batch,
    kl_lower_bound_integral,
)
from .divcore import (
    IDENTITY,
    SQUARE,
    Bernoulli,
    DiscreteFinite,
    Exponential,
    FoI,
    GenericDensity,
    MomentSummary,
    Normal,
    QuadratureSpec,
    alpha_divergence,
    chi_sq,
    hellinger_sq,
    kl_exact,
    moments,
)
from .errors import (
    InapplicableError,
    InputError,
    KLBoundError,
    QuadratureError,
    SupportMismatchError,
)
from .estimate import FoIBank, SampleMoments, bound_from_samples, ingest, stream_moments
from .mixture import (
    MixturePath,
    check_fisher_identity,
    check_lemma1,
    cramer_rao_limit_check,
    fisher_info_along_path,
    mixture_at,
    mixture_moments,
)

__version__ = "0.1.0"
