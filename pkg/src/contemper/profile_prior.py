"""The optimum-pinned prior for the inverse temperature.

The tau-prior is defined so the joint density along (tau, theta_max(tau)) is
flat: log P(tau) = -[tau*log_lik(theta_max(tau)) + log_prior(theta_max(tau))]
up to a constant that cancels in every acceptance ratio.  Evaluating it needs
the profile optimum theta_max(tau), which is found by the model's maximizer
warm-started from the nearest previously solved temperature, or (for long
runs) read off a spline fit of the optimum manifold built ahead of time.
"""
from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BSpline, make_lsq_spline

from .models.base import ParameterVector, TargetModel, tempered_log_posterior
from .optimize import OptimizationError, OptimizerSettings

TAU_FLOOR = 1e-15


@dataclass
class CacheEntry:
    theta: ParameterVector
    log_lik: float
    log_prior: float

    def tempered_value(self, tau):
        if self.log_prior == -np.inf:
            return -np.inf
        return (self.log_prior if tau == 0.0
                else tau * self.log_lik + self.log_prior)


class OptimumCache:
    """Ordered map tau -> profile optimum, supporting nearest-key warm starts.

    Unbounded by default; ``max_size`` turns on farthest-point eviction.
    Owned by a single chain, never shared.
    """

    def __init__(self, max_size=None):
        self._taus = []            # sorted keys
        self._entries = {}
        self.max_size = max_size

    def __len__(self):
        return len(self._taus)

    def __contains__(self, tau):
        return float(tau) in self._entries

    @property
    def taus(self):
        return tuple(self._taus)

    def exact(self, tau):
        return self._entries.get(float(tau))

    def nearest(self, tau):
        """(tau_key, entry) with the smallest |tau_key - tau|; ties -> smaller key."""
        if not self._taus:
            return None
        tau = float(tau)
        i = bisect.bisect_left(self._taus, tau)
        best = None
        for j in (i - 1, i):
            if 0 <= j < len(self._taus):
                cand = self._taus[j]
                dist = abs(cand - tau)
                if best is None or dist < best[0] or (dist == best[0] and cand < best[1]):
                    best = (dist, cand)
        key = best[1]
        return key, self._entries[key]

    def insert(self, tau, entry: CacheEntry):
        tau = float(tau)
        if tau not in self._entries:
            bisect.insort(self._taus, tau)
        self._entries[tau] = entry
        if self.max_size is not None and len(self._taus) > self.max_size:
            self._evict_farthest(tau)

    def _evict_farthest(self, keep_tau):
        far = max(self._taus, key=lambda t: abs(t - keep_tau))
        self._taus.remove(far)
        del self._entries[far]

    def items(self):
        return [(t, self._entries[t]) for t in self._taus]


def theta_max(model: TargetModel, tau, cache: OptimumCache,
              settings: OptimizerSettings | None = None) -> ParameterVector:
    """Profile optimum at ``tau``, warm-started from the nearest cached key.

    The result is guaranteed not to fall below the warm-start point on the
    tempered posterior at ``tau``, and is inserted into the cache.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    settings = settings or OptimizerSettings()
    hit = cache.exact(tau)
    if hit is not None:
        return hit.theta

    warm = cache.nearest(tau)
    warm_theta = warm[1].theta if warm is not None else None
    theta = model.maximize(tau, warm_start=warm_theta, settings=settings)
    value = tempered_log_posterior(model, theta, tau)
    if warm_theta is not None:
        warm_value = tempered_log_posterior(model, warm_theta, tau)
        if warm_value > value:
            theta, value = warm_theta.copy(), warm_value
    cache.insert(tau, CacheEntry(theta, model.log_lik(theta), model.log_prior(theta)))
    return theta


def log_tau_prior_unnormalized(model, tau, cache, settings=None) -> float:
    """-[tau*log_lik(theta_max) + log_prior(theta_max)]; the dropped constant
    is the flat ridge height, so adding back the tempered log posterior at the
    optimum gives exactly zero."""
    theta_max(model, tau, cache, settings)
    entry = cache.exact(tau)
    return -entry.tempered_value(tau)


# ---------------------------------------------------------------------------
# Spline acceleration of the optimum manifold
# ---------------------------------------------------------------------------

INTERPOLATOR_SCHEMA = "contemper-profile-interpolator/1"


@dataclass
class ProfileInterpolator:
    """Per-parameter spline fit of theta_max over log10(tau) in [1e-15, 1].

    Continuous parameters are cubic-spline least-squares fits (positive-support
    parameters fitted on their log scale); discrete parameters are a step
    function looked up at the nearest grid point.  Immutable once built apart
    from the clamp counter.
    """

    log10_grid: np.ndarray
    continuous_names: tuple
    log_scale: tuple
    splines: dict
    discrete_names: tuple
    discrete_table: np.ndarray
    n_knots: int
    clamp_count: int = 0
    grid_values: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> str:
        payload = {
            "schema": INTERPOLATOR_SCHEMA,
            "log10_grid": self.log10_grid.tolist(),
            "continuous_names": list(self.continuous_names),
            "log_scale": list(self.log_scale),
            "n_knots": self.n_knots,
            "splines": {
                name: {"t": spl.t.tolist(), "c": spl.c.tolist(), "k": int(spl.k)}
                for name, spl in self.splines.items()
            },
            "discrete_names": list(self.discrete_names),
            "discrete_table": self.discrete_table.tolist(),
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ProfileInterpolator":
        payload = json.loads(text)
        if payload.get("schema") != INTERPOLATOR_SCHEMA:
            raise ValueError(f"unrecognized interpolator schema: {payload.get('schema')!r}")
        splines = {
            name: BSpline(np.asarray(d["t"]), np.asarray(d["c"]), int(d["k"]))
            for name, d in payload["splines"].items()
        }
        return cls(
            log10_grid=np.asarray(payload["log10_grid"], dtype=float),
            continuous_names=tuple(payload["continuous_names"]),
            log_scale=tuple(payload["log_scale"]),
            splines=splines,
            discrete_names=tuple(payload["discrete_names"]),
            discrete_table=np.asarray(payload["discrete_table"], dtype=np.int64).reshape(
                len(payload["log10_grid"]), -1) if payload["discrete_names"] else
                np.empty((len(payload["log10_grid"]), 0), dtype=np.int64),
            n_knots=int(payload["n_knots"]),
        )


def build_interpolator(model: TargetModel, n_grid=301, n_knots=60,
                       settings: OptimizerSettings | None = None) -> ProfileInterpolator:
    """Optimize theta_max over a log10-uniform tau grid and fit the manifold.

    The grid is walked from tau=1 downward so each solve is warm-started by
    continuation from its neighbour.
    """
    if n_grid < n_knots + 4:
        raise ValueError("need n_grid >= n_knots + 4 for a determined fit")
    settings = settings or OptimizerSettings()
    layout = model.layout
    log10_grid = np.linspace(np.log10(TAU_FLOOR), 0.0, n_grid)
    taus = 10.0 ** log10_grid
    taus[-1] = 1.0

    n_cont = len(layout.continuous_names)
    n_disc = len(layout.discrete_names)
    values = np.empty((n_grid, n_cont))
    discrete = np.empty((n_grid, n_disc), dtype=np.int64)

    warm = None
    for i in range(n_grid - 1, -1, -1):
        theta = model.maximize(taus[i], warm_start=warm, settings=settings)
        values[i] = theta.continuous
        discrete[i] = theta.discrete
        warm = theta

    knots = np.linspace(log10_grid[0], log10_grid[-1], n_knots)
    t = np.concatenate([[knots[0]] * 3, knots, [knots[-1]] * 3])
    splines = {}
    for j, name in enumerate(layout.continuous_names):
        y = values[:, j]
        if name in layout.log_scale:
            y = np.log(np.maximum(y, 1e-300))
        try:
            splines[name] = make_lsq_spline(log10_grid, y, t, k=3)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"rank-deficient spline fit for parameter {name!r}") from exc

    return ProfileInterpolator(
        log10_grid=log10_grid,
        continuous_names=tuple(layout.continuous_names),
        log_scale=tuple(layout.log_scale),
        splines=splines,
        discrete_names=tuple(layout.discrete_names),
        discrete_table=discrete,
        n_knots=n_knots,
        grid_values=values,
    )


def eval_interpolated(interp: ProfileInterpolator, tau) -> ParameterVector:
    """Spline evaluation for continuous entries, nearest-grid step lookup for
    discrete ones.  tau below the domain floor is clamped (counted)."""
    if tau > 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if tau < TAU_FLOOR:
        interp.clamp_count += 1
        tau = TAU_FLOOR
    x = np.log10(tau)
    cont = np.empty(len(interp.continuous_names))
    for j, name in enumerate(interp.continuous_names):
        v = float(interp.splines[name](x))
        cont[j] = np.exp(v) if name in interp.log_scale else v
    if interp.discrete_names:
        i = int(np.argmin(np.abs(interp.log10_grid - x)))
        disc = interp.discrete_table[i]
    else:
        disc = np.empty(0, dtype=np.int64)
    return ParameterVector(cont, disc)


class ProfileTauPrior:
    """Callable view of the tau-prior used by the temperature transition.

    Backed either by warm-started optimization with an OptimumCache or by a
    prebuilt ProfileInterpolator.  ``optimum_terms(tau)`` returns
    (log_lik, log_prior) at the profile optimum; ``log_prior(tau)`` is the
    unnormalized log tau-prior built from them.
    """

    def __init__(self, model, cache: OptimumCache | None = None,
                 settings: OptimizerSettings | None = None,
                 interpolator: ProfileInterpolator | None = None):
        self.model = model
        self.cache = cache if cache is not None else OptimumCache()
        self.settings = settings or OptimizerSettings()
        self.interpolator = interpolator
        self.optimizer_failures = 0
        self._memo = {}

    def optimum_terms(self, tau):
        tau = float(tau)
        if self.interpolator is not None:
            hit = self._memo.get(tau)
            if hit is None:
                theta = eval_interpolated(self.interpolator, tau)
                hit = (self.model.log_lik(theta), self.model.log_prior(theta))
                if len(self._memo) > 4096:
                    self._memo.clear()
                self._memo[tau] = hit
            return hit
        entry = self.cache.exact(tau)
        if entry is None:
            theta_max(self.model, tau, self.cache, self.settings)
            entry = self.cache.exact(tau)
        return entry.log_lik, entry.log_prior

    def log_prior(self, tau):
        ll, lp = self.optimum_terms(tau)
        tau = float(tau)
        return -(lp if tau == 0.0 else tau * ll + lp)
