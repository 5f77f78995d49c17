"""Finite Gaussian mixture for the galaxy velocity data.

The observed-data likelihood is the plain mixture; the latent allocation
matrix Z only appears inside the conjugate Gibbs sweep.  Tempering raises the
Gaussian factors (not the allocation prior) to tau, so the tau=1 sweep is the
standard conjugate sampler for the posterior.
"""
from __future__ import annotations

from importlib import resources

import numpy as np
from scipy.special import gammaln, logsumexp

from ..optimize import OptimizerSettings
from .base import ParameterLayout, ParameterVector, TargetModel

_LOG_2PI = np.log(2.0 * np.pi)


def load_galaxy_data() -> np.ndarray:
    """The 82 galaxy velocities bundled with the package (1000 km/s units)."""
    text = resources.files("contemper.models").joinpath(
        "data/galaxy_velocities.csv").read_text()
    return np.array([float(line) for line in text.splitlines()[1:] if line.strip()])


class GalaxyMixtureModel(TargetModel):
    """K-component Gaussian mixture with conjugate priors.

    mu_k ~ N(20, 100), sigma2 ~ InverseGamma(3, 20) (one per component, or a
    single pooled variance when ``equal_variances``), p ~ Dirichlet(1,..,1).
    """

    supports_gibbs = True

    def __init__(self, data=None, K=3, equal_variances=False,
                 mu_prior_mean=20.0, mu_prior_var=100.0,
                 ig_shape=3.0, ig_scale=20.0):
        self.data = np.asarray(load_galaxy_data() if data is None else data, dtype=float)
        if self.data.ndim != 1 or self.data.size == 0:
            raise ValueError("data must be a non-empty vector")
        self.K = int(K)
        if self.K < 1:
            raise ValueError("K must be >= 1")
        self.equal_variances = bool(equal_variances)
        self.mu_prior_mean = float(mu_prior_mean)
        self.mu_prior_var = float(mu_prior_var)
        self.ig_shape = float(ig_shape)
        self.ig_scale = float(ig_scale)
        self.n = self.data.size
        self.z_underflow_count = 0
        kind = "eq" if self.equal_variances else "uneq"
        self.name = f"galaxy_K{self.K}_{kind}"

        mu_names = tuple(f"mu_{k+1}" for k in range(self.K))
        s2_names = ("sigma2",) if self.equal_variances else tuple(
            f"sigma2_{k+1}" for k in range(self.K))
        p_names = tuple(f"p_{k+1}" for k in range(self.K))
        self.layout = ParameterLayout(mu_names + s2_names + p_names,
                                      log_scale=s2_names)
        self._n_sigma2 = len(s2_names)

    # -- packing -------------------------------------------------------------

    def unpack(self, theta: ParameterVector):
        c = theta.continuous
        K = self.K
        mu = c[:K]
        sigma2 = c[K:K + self._n_sigma2]
        p = c[K + self._n_sigma2:]
        if self.equal_variances:
            sigma2 = np.full(K, sigma2[0])
        return mu, sigma2, p

    def pack(self, mu, sigma2, p) -> ParameterVector:
        sigma2 = np.atleast_1d(sigma2)
        if self.equal_variances and sigma2.size == self.K:
            sigma2 = sigma2[:1]
        return ParameterVector(np.concatenate([mu, sigma2, p]))

    # -- densities -------------------------------------------------------------

    def _component_logpdf(self, mu, sigma2):
        # (n, K) matrix of log N(y_i | mu_k, sigma2_k)
        return (-0.5 * (_LOG_2PI + np.log(sigma2))
                - 0.5 * (self.data[:, None] - mu) ** 2 / sigma2)

    def log_lik(self, theta: ParameterVector) -> float:
        mu, sigma2, p = self.unpack(theta)
        if np.any(sigma2 <= 0) or np.any(p < 0):
            return -np.inf
        with np.errstate(divide="ignore"):
            logw = np.log(p) + self._component_logpdf(mu, sigma2)
        return float(np.sum(logsumexp(logw, axis=1)))

    def log_prior(self, theta: ParameterVector) -> float:
        mu, sigma2, p = self.unpack(theta)
        if np.any(sigma2 <= 0) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-8:
            return -np.inf
        lp = float(np.sum(-0.5 * (_LOG_2PI + np.log(self.mu_prior_var))
                          - 0.5 * (mu - self.mu_prior_mean) ** 2 / self.mu_prior_var))
        a, b = self.ig_shape, self.ig_scale
        s2 = sigma2[:1] if self.equal_variances else sigma2
        lp += float(np.sum(a * np.log(b) - gammaln(a) - (a + 1) * np.log(s2) - b / s2))
        lp += float(gammaln(self.K))      # Dirichlet(1,..,1) density on the simplex
        return lp

    # -- latent allocations ----------------------------------------------------

    def sample_allocations(self, theta: ParameterVector, tau, rng) -> np.ndarray:
        """One-hot (n, K) allocation draw; rows ~ categorical with
        probabilities proportional to p_k * N(y_i|mu_k, sigma2_k)^tau."""
        mu, sigma2, p = self.unpack(theta)
        with np.errstate(divide="ignore"):
            logits = np.log(p) + tau * self._component_logpdf(mu, sigma2)
        logits -= logits.max(axis=1, keepdims=True)
        w = np.exp(logits)
        totals = w.sum(axis=1)
        bad = ~np.isfinite(totals) | (totals <= 0)
        if np.any(bad):
            self.z_underflow_count += int(bad.sum())
            w[bad] = 1.0
            totals = w.sum(axis=1)
        probs = w / totals[:, None]
        cum = np.cumsum(probs, axis=1)
        u = rng.uniform(size=(self.n, 1))
        labels = (u > cum).sum(axis=1)
        Z = np.zeros((self.n, self.K), dtype=np.int64)
        Z[np.arange(self.n), labels] = 1
        return Z

    def gibbs_sweep(self, theta: ParameterVector, tau, rng) -> ParameterVector:
        """Allocation draw followed by the tempered conjugate conditionals.

        mu_k gets precision tau*n_k/sigma2_k + 1/100; sigma2 an inverse gamma
        with shape 3 + tau*n_k/2 and scale 20 + tau*SSE_k/2 (pooled across
        components in the equal-variance variant); p is Dirichlet(1 + counts)
        with raw counts since the allocation prior is not tempered.  Empty
        components fall back to their priors.
        """
        mu, sigma2, p = self.unpack(theta)
        Z = self.sample_allocations(theta, tau, rng)
        counts = Z.sum(axis=0).astype(float)
        sums = Z.T @ self.data

        prec = tau * counts / sigma2 + 1.0 / self.mu_prior_var
        mean = (tau * sums / sigma2 + self.mu_prior_mean / self.mu_prior_var) / prec
        mu_new = mean + rng.standard_normal(self.K) / np.sqrt(prec)

        sse = np.einsum("ik,ik->k", Z.astype(float), (self.data[:, None] - mu_new) ** 2)
        a, b = self.ig_shape, self.ig_scale
        if self.equal_variances:
            shape = a + 0.5 * tau * self.n
            scale = b + 0.5 * tau * float(sse.sum())
            sigma2_new = np.array([scale / rng.gamma(shape)])
        else:
            shape = a + 0.5 * tau * counts
            scale = b + 0.5 * tau * sse
            sigma2_new = scale / rng.gamma(shape)

        p_new = rng.dirichlet(1.0 + counts)
        return self.pack(mu_new, sigma2_new, p_new)

    # -- tempered maximization (EM-style conditional ascent) --------------------

    def maximize(self, tau, warm_start=None, settings=None) -> ParameterVector:
        """Local maximizer of tau*log_lik + log_prior by responsibility-
        weighted conditional updates; the objective is non-decreasing across
        cycles.  Non-convergence returns the best iterate found."""
        settings = settings or OptimizerSettings()
        tau = float(tau)
        if warm_start is not None:
            mu, sigma2, p = self.unpack(warm_start)
            mu, sigma2, p = mu.copy(), sigma2.copy(), p.copy()
        else:
            qs = np.linspace(0.1, 0.9, self.K)
            mu = np.quantile(self.data, qs)
            sigma2 = np.full(self.K, max(np.var(self.data) / max(self.K, 1), 1e-3))
            p = np.full(self.K, 1.0 / self.K)
        p = np.maximum(p, 1e-12)
        p /= p.sum()

        a, b = self.ig_shape, self.ig_scale
        m0, v0 = self.mu_prior_mean, self.mu_prior_var
        for _ in range(settings.max_iterations):
            mu_old, s2_old, p_old = mu.copy(), sigma2.copy(), p.copy()
            logw = np.log(p) + self._component_logpdf(mu, sigma2)
            logw -= logsumexp(logw, axis=1, keepdims=True)
            r = np.exp(logw)                       # responsibilities
            nk = r.sum(axis=0)
            sums = r.T @ self.data

            mu = (tau * sums / sigma2 + m0 / v0) / (tau * nk / sigma2 + 1.0 / v0)
            sse = np.einsum("ik,ik->k", r, (self.data[:, None] - mu) ** 2)
            if self.equal_variances:
                sigma2 = np.full(self.K, (b + 0.5 * tau * sse.sum())
                                 / (a + 1.0 + 0.5 * tau * self.n))
            else:
                sigma2 = (b + 0.5 * tau * sse) / (a + 1.0 + 0.5 * tau * nk)
            if tau * self.n > 0:
                p = np.maximum(tau * nk, 1e-12)
                p /= p.sum()
            else:
                p = np.full(self.K, 1.0 / self.K)

            delta = max(np.max(np.abs(mu - mu_old)), np.max(np.abs(sigma2 - s2_old)),
                        np.max(np.abs(p - p_old)))
            if delta < settings.tolerance:
                break
        return self.pack(mu, sigma2, p)

    # -- proposal kernels ---------------------------------------------------------

    def _scales(self, tau):
        d = len(self.layout.continuous_names)
        root_d = np.sqrt(d)
        vbar = max(np.var(self.data), 1e-6)
        s_mu = (2.4 / root_d) * np.sqrt(1.0 / (tau * self.n / (self.K * vbar)
                                               + 1.0 / self.mu_prior_var))
        s_log_s2 = (2.4 / root_d) * np.sqrt(1.0 / (self.ig_shape
                                                   + 0.5 * tau * self.n / self.K))
        eps_p = (2.4 / root_d) * np.sqrt(0.25 / (tau * self.n + self.K))
        return s_mu, s_log_s2, eps_p

    def propose_theta(self, theta, tau, rng, phase="tempered"):
        mu, sigma2, p = self.unpack(theta)
        s_mu, s_log_s2, eps_p = self._scales(tau)
        mu_new = mu + s_mu * rng.standard_normal(self.K)
        if self.equal_variances:
            factor = np.exp(s_log_s2 * rng.standard_normal())
            sigma2_new = sigma2 * factor
            correction = float(np.log(factor))
        else:
            factors = np.exp(s_log_s2 * rng.standard_normal(self.K))
            sigma2_new = sigma2 * factors
            correction = float(np.sum(np.log(factors)))
        p_new = p.copy()
        if self.K > 1:
            j, l = rng.choice(self.K, size=2, replace=False)
            delta = rng.uniform(-eps_p, eps_p)
            p_new[j] += delta
            p_new[l] -= delta
        return self.pack(mu_new, sigma2_new, p_new), correction

    def propose_tau(self, tau, rng):
        return float(rng.uniform(0.0, 1.0)), 0.0

    def initial_theta(self, rng) -> ParameterVector:
        mu = self.mu_prior_mean + np.sqrt(self.mu_prior_var) * rng.standard_normal(self.K)
        n_s2 = 1 if self.equal_variances else self.K
        sigma2 = self.ig_scale / rng.gamma(self.ig_shape, size=n_s2)
        p = rng.dirichlet(np.ones(self.K))
        return self.pack(mu, np.full(self.K, sigma2[0]) if self.equal_variances else sigma2, p)
