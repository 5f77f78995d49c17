"""Susceptible-Infected-Recovered ODE model for the Eyam plague window.

Cumulative deaths are Binomial observations of the removed compartment;
two extra Binomial constraints pin one infected on the second-to-last day
and zero on the last.  The mixed discrete/continuous parameter (alpha, beta,
I0) makes the posterior multimodal over I0.
"""
from __future__ import annotations

from importlib import resources

import numpy as np
from scipy.special import gammaln
from scipy.stats import norm

from ..ode import OdeFailure, OdeProblem, integrate
from ..optimize import OptimizerSettings, discrete_line_search, nelder_mead
from .base import ParameterLayout, ParameterVector, TargetModel

_PROB_FLOOR = 1e-12
_TAU_FLOOR = 1e-15


def load_eyam_data():
    """(days, cumulative deaths) bundled with the package."""
    text = resources.files("contemper.models").joinpath(
        "data/eyam_cumulative_deaths.csv").read_text()
    rows = [line.split(",") for line in text.splitlines()[1:] if line.strip()]
    days = np.array([float(r[0]) for r in rows])
    deaths = np.array([int(r[1]) for r in rows])
    return days, deaths


class SIRModel(TargetModel):
    """alpha, beta ~ Gamma(1, 1); I0 ~ Binomial(N, 5/N); N fixed at 261.

    The likelihood integrates the SIR system from (N - I0, I0, 0) and scores
    the death counts against R(t)/N and the two infected constraints against
    I(t)/N, with probabilities clamped away from {0, 1} so solver round-off
    cannot produce -inf.
    """

    def __init__(self, times=None, deaths=None, population=261,
                 infected_constraints=(1, 0), i0_candidates=range(1, 9),
                 rtol=1e-6, atol=1e-8, i0_prior_mean=5.0):
        if times is None or deaths is None:
            times, deaths = load_eyam_data()
        self.times = np.asarray(times, dtype=float)
        self.deaths = np.asarray(deaths, dtype=np.int64)
        if self.times.shape != self.deaths.shape or self.times.ndim != 1:
            raise ValueError("times and deaths must be equal-length vectors")
        if np.any(self.times <= 0):
            raise ValueError("observation times must be positive (t0 = 0)")
        self.N = int(population)
        self.x_constraints = np.asarray(infected_constraints, dtype=np.int64)
        self.i0_candidates = tuple(int(k) for k in i0_candidates)
        self.rtol = float(rtol)
        self.atol = float(atol)
        self.i0_prior_p = float(i0_prior_mean) / self.N
        self.n = self.times.size
        self.ode_failures = 0
        self.name = "sir"
        self.layout = ParameterLayout(
            ("alpha", "beta"), ("I0",), log_scale=("alpha", "beta"),
            discrete_support={"I0": (0, self.N)})

        # y-dependent binomial terms, fixed per dataset
        self._y_comb = (gammaln(self.N + 1) - gammaln(self.deaths + 1)
                        - gammaln(self.N - self.deaths + 1))
        x = self.x_constraints
        self._x_comb = (gammaln(self.N + 1) - gammaln(x + 1)
                        - gammaln(self.N - x + 1))

    # -- dynamics ---------------------------------------------------------------

    def solve_states(self, alpha, beta, i0) -> np.ndarray:
        """(n_times, 3) array of (S, I, R) at the observation times."""
        def rhs(t, u):
            s, i = u[0], u[1]
            si = beta * s * i
            return np.array([-si, si - alpha * i, alpha * i])

        y0 = np.array([self.N - i0, i0, 0.0], dtype=float)
        problem = OdeProblem(rhs, y0, self.times, rtol=self.rtol, atol=self.atol)
        return integrate(problem)

    def log_lik(self, theta: ParameterVector) -> float:
        alpha, beta = theta.continuous
        i0 = int(theta.discrete[0])
        return self.log_lik_parts(alpha, beta, i0)

    def log_lik_parts(self, alpha, beta, i0) -> float:
        if alpha <= 0 or beta <= 0 or not (0 <= i0 <= self.N):
            return -np.inf
        if i0 == 0:
            states = np.zeros((self.n, 3))
            states[:, 0] = self.N
        else:
            try:
                states = self.solve_states(alpha, beta, i0)
            except (OdeFailure, ValueError, FloatingPointError):
                self.ode_failures += 1
                return -np.inf
            if not np.all(np.isfinite(states)):
                self.ode_failures += 1
                return -np.inf
        states = np.maximum(states, 0.0)
        p_dead = np.clip(states[:, 2] / self.N, _PROB_FLOOR, 1.0 - _PROB_FLOOR)
        ll = float(np.sum(self._y_comb + self.deaths * np.log(p_dead)
                          + (self.N - self.deaths) * np.log1p(-p_dead)))
        p_inf = np.clip(states[-2:, 1] / self.N, _PROB_FLOOR, 1.0 - _PROB_FLOOR)
        x = self.x_constraints
        ll += float(np.sum(self._x_comb + x * np.log(p_inf)
                           + (self.N - x) * np.log1p(-p_inf)))
        return ll

    # -- prior --------------------------------------------------------------------

    def log_prior(self, theta: ParameterVector) -> float:
        alpha, beta = theta.continuous
        i0 = int(theta.discrete[0])
        if alpha <= 0 or beta <= 0 or not (0 <= i0 <= self.N):
            return -np.inf
        lp = -alpha - beta                      # two Gamma(1,1) densities
        lp += self._binom_logpmf(i0, self.i0_prior_p)
        return float(lp)

    def _binom_logpmf(self, k, p):
        if p <= 0.0:
            return 0.0 if k == 0 else -np.inf
        if p >= 1.0:
            return 0.0 if k == self.N else -np.inf
        return (gammaln(self.N + 1) - gammaln(k + 1) - gammaln(self.N - k + 1)
                + k * np.log(p) + (self.N - k) * np.log1p(-p))

    # -- proposals ------------------------------------------------------------------

    def _log_rate_scale(self, tau):
        # prior sd of log Gamma(1,1) is ~1.28; the data shrink it by ~sqrt(tau*n)
        return (2.4 / np.sqrt(3.0)) * 1.28 / np.sqrt(1.0 + 2000.0 * tau)

    def propose_theta(self, theta, tau, rng, phase="tempered"):
        alpha, beta = theta.continuous
        i0 = int(theta.discrete[0])
        s = self._log_rate_scale(tau)
        alpha_new = alpha * np.exp(s * rng.standard_normal())
        beta_new = beta * np.exp(s * rng.standard_normal())
        correction = float(np.log(alpha_new / alpha) + np.log(beta_new / beta))

        i0_new = int(rng.binomial(self.N, i0 / self.N)) if i0 > 0 else 0
        correction += (self._binom_logpmf(i0, i0_new / self.N)
                       - self._binom_logpmf(i0_new, i0 / self.N))
        return ParameterVector([alpha_new, beta_new], [i0_new]), correction

    def propose_tau(self, tau, rng):
        # independence draw from a standard normal truncated to [0, 1]
        lo, hi = norm.cdf(0.0), norm.cdf(1.0)
        tau_new = float(norm.ppf(rng.uniform(lo, hi)))
        tau_new = min(max(tau_new, 0.0), 1.0)
        correction = 0.5 * (tau_new ** 2 - tau ** 2)
        return tau_new, correction

    def initial_theta(self, rng) -> ParameterVector:
        alpha = rng.gamma(1.0)
        beta = rng.gamma(1.0)
        # I0 = 0 is an absorbing start for the binomial kernel; resample it
        i0 = 0
        while i0 == 0:
            i0 = int(rng.binomial(self.N, self.i0_prior_p))
        return ParameterVector([alpha, beta], [i0])

    # -- tempered maximization ----------------------------------------------------

    def maximize(self, tau, warm_start=None, settings=None) -> ParameterVector:
        """Nelder-Mead over (log alpha, log beta) for each I0 candidate, then
        the exhaustive winner.  tau = 0 uses the tau-floor convention (1e-15)
        since the Gamma(1,1) prior mode sits on the boundary."""
        settings = settings or OptimizerSettings()
        tau = max(float(tau), _TAU_FLOOR)
        if warm_start is not None:
            x0 = np.log(np.maximum(warm_start.continuous, 1e-10))
        else:
            x0 = np.log([0.1, 1.7 * 0.1 / self.N])

        def maximize_given_i0(k):
            lp_i0 = self._binom_logpmf(k, self.i0_prior_p)

            def objective(x):
                if np.any(np.abs(x) > 50):
                    return -np.inf
                alpha, beta = np.exp(x)
                ll = self.log_lik_parts(alpha, beta, k)
                if ll == -np.inf:
                    return -np.inf
                return tau * ll - alpha - beta + lp_i0

            try:
                return nelder_mead(objective, x0, settings)
            except ValueError:
                return x0, -np.inf

        k_best, x_best, _ = discrete_line_search(self.i0_candidates, maximize_given_i0)
        alpha, beta = np.exp(x_best)
        return ParameterVector([alpha, beta], [k_best])
