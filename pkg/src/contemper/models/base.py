"""Model contract shared by the samplers, the profile-optimum machinery and
the experiment CLI."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ParameterVector:
    """Continuous and integer coordinates of one model state."""

    continuous: np.ndarray
    discrete: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        self.continuous = np.atleast_1d(np.asarray(self.continuous, dtype=float))
        self.discrete = np.atleast_1d(np.asarray(self.discrete, dtype=np.int64))

    def copy(self) -> "ParameterVector":
        return ParameterVector(self.continuous.copy(), self.discrete.copy())

    def as_row(self) -> np.ndarray:
        """Flat float view (continuous then discrete), used by trace writers."""
        return np.concatenate([self.continuous, self.discrete.astype(float)])

    def close_to(self, other: "ParameterVector", atol=0.0) -> bool:
        return (self.continuous.shape == other.continuous.shape
                and self.discrete.shape == other.discrete.shape
                and np.allclose(self.continuous, other.continuous, rtol=0, atol=atol)
                and np.array_equal(self.discrete, other.discrete))


@dataclass(frozen=True)
class ParameterLayout:
    """Names and supports of the model's coordinates.

    ``continuous_names``/``discrete_names`` order matches ParameterVector;
    ``log_scale`` flags continuous coordinates with positive support (these
    are searched and interpolated on the log scale).
    """

    continuous_names: tuple
    discrete_names: tuple = ()
    log_scale: tuple = ()
    discrete_support: dict = field(default_factory=dict)

    @property
    def names(self):
        return tuple(self.continuous_names) + tuple(self.discrete_names)


class TargetModel:
    """Contract the samplers rely on.  Subclasses provide the likelihood,
    the prior, proposal kernels and a tempered-posterior maximizer.

    log_lik/log_prior must be deterministic; points outside the prior
    support return -inf from log_prior (never raise).  Proposal methods
    return ``(candidate, log_hastings)`` where log_hastings is
    log q(current|candidate) - log q(candidate|current).
    """

    name: str = "model"
    layout: ParameterLayout
    supports_gibbs: bool = False

    def log_lik(self, theta: ParameterVector) -> float:
        raise NotImplementedError

    def log_prior(self, theta: ParameterVector) -> float:
        raise NotImplementedError

    def propose_theta(self, theta, tau, rng, phase="tempered"):
        raise NotImplementedError

    def propose_tau(self, tau, rng):
        raise NotImplementedError

    def maximize(self, tau, warm_start=None, settings=None) -> ParameterVector:
        """Return a local maximizer of tau*log_lik + log_prior."""
        raise NotImplementedError

    def initial_theta(self, rng) -> ParameterVector:
        raise NotImplementedError

    def gibbs_sweep(self, theta, tau, rng) -> ParameterVector:
        raise NotImplementedError(f"{self.name} has no Gibbs sweep")


def tempered_log_posterior(model: TargetModel, theta: ParameterVector, tau: float) -> float:
    """log of the unnormalized tempered density: tau*log P(Y|theta) + log P(theta).

    tau=0 reduces to the prior without evaluating the likelihood weight, so a
    -inf likelihood cannot poison the prior endpoint.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    lp = model.log_prior(theta)
    if lp == -np.inf:
        return -np.inf
    if tau == 0.0:
        return lp
    return tau * model.log_lik(theta) + lp
