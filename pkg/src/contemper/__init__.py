"""Tempered MCMC with a continuous inverse temperature.

A single tempered chain moves (theta, tau) jointly, with the tau-prior pinned
to the profile optimum so temperature moves never need per-temperature
normalizing constants.  A two-chain hybrid couples it to a fixed tau=1 chain
by replica exchange, classical multi-chain parallel tempering is provided for
comparison, and the traces feed thermodynamic-integration estimates of the
marginal likelihood.
"""

__version__ = "0.1.0"

from .models.base import ParameterVector, TargetModel, tempered_log_posterior
from .tempering import (
    ChainState,
    PairState,
    geometric_schedule,
    pt_exchange_step,
    pt_stwnc_iteration,
    run_pt_stwnc,
    run_standard_pt,
    stwnc_tau_step,
    stwnc_theta_step,
)
from .evidence import (
    EvidenceEstimate,
    TiSeries,
    log_bayes_factor,
    ti_pt_bias_corrected,
    ti_pt_trapezoid,
    ti_stwnc,
    variance_bound,
)
from .profile_prior import (
    OptimumCache,
    ProfileTauPrior,
    build_interpolator,
    eval_interpolated,
    log_tau_prior_unnormalized,
    theta_max,
)

__all__ = [
    "ParameterVector", "TargetModel", "tempered_log_posterior",
    "ChainState", "PairState", "geometric_schedule", "pt_exchange_step",
    "pt_stwnc_iteration", "run_pt_stwnc", "run_standard_pt",
    "stwnc_tau_step", "stwnc_theta_step",
    "EvidenceEstimate", "TiSeries", "log_bayes_factor",
    "ti_pt_bias_corrected", "ti_pt_trapezoid", "ti_stwnc", "variance_bound",
    "OptimumCache", "ProfileTauPrior", "build_interpolator",
    "eval_interpolated", "log_tau_prior_unnormalized", "theta_max",
]
