"""Tempered transitions and chain drivers.

Three samplers share the machinery here: the single-chain continuous-
temperature sampler (a theta move at fixed tau, then a tau move whose
acceptance ratio is pinned to the profile optimum so no per-temperature
normalizing constant ever appears), the two-chain hybrid that couples it to a
fixed tau=1 target chain through replica exchange, and classical multi-chain
parallel tempering on a fixed schedule.

Every acceptance decision happens in log space: log(u) is compared with the
log ratio, nothing is exponentiated first.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .models.base import ParameterVector, TargetModel, tempered_log_posterior
from .optimize import OptimizationError, OptimizerSettings
from .profile_prior import ProfileTauPrior

TEMPERED = "tempered"
TARGET = "target"


@dataclass
class ChainState:
    """Current point of one chain with its cached log densities."""

    theta: ParameterVector
    tau: float
    log_lik: float
    log_prior: float

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")

    @classmethod
    def from_theta(cls, model: TargetModel, theta: ParameterVector, tau: float):
        return cls(theta, float(tau), model.log_lik(theta), model.log_prior(theta))

    def tempered_log_post(self) -> float:
        if self.log_prior == -np.inf:
            return -np.inf
        return self.log_prior if self.tau == 0.0 else self.tau * self.log_lik + self.log_prior


@dataclass
class PairState:
    """Tempered chain (tau free) coupled to the target chain (tau pinned at 1)."""

    tempered: ChainState
    target: ChainState

    def __post_init__(self):
        if self.target.tau != 1.0:
            raise ValueError("target chain tau must be exactly 1")


@dataclass
class TraceRecord:
    iteration: int
    chain_id: str
    theta: ParameterVector
    tau: float
    log_lik: float
    accepted_theta: bool
    accepted_tau: bool
    exchanged: bool
    burn_in: bool


def _accept(rng, log_ratio) -> bool:
    if log_ratio >= 0.0:
        return True
    if log_ratio == -np.inf or not np.isfinite(log_ratio):
        return False
    return np.log(rng.uniform()) < log_ratio


# ---------------------------------------------------------------------------
# Transitions
# ---------------------------------------------------------------------------

def stwnc_theta_step(model: TargetModel, state: ChainState, rng):
    """Metropolis-Hastings move of theta at fixed tau.  Returns (state, accepted)."""
    theta_new, log_q = model.propose_theta(state.theta, state.tau, rng)
    lp_new = model.log_prior(theta_new)
    if lp_new == -np.inf:
        return state, False
    ll_new = model.log_lik(theta_new)
    cand = ChainState(theta_new, state.tau, ll_new, lp_new)
    log_ratio = cand.tempered_log_post() - state.tempered_log_post() + log_q
    if _accept(rng, log_ratio):
        return cand, True
    return state, False


def stwnc_tau_step(model: TargetModel, state: ChainState, prior: ProfileTauPrior, rng):
    """Metropolis-Hastings move of tau at fixed theta.

    The ratio multiplies the tempered-likelihood change by the optimum-pinned
    prior ratio; all four optimum terms come from the prior object so both
    directions of any (tau_a, tau_b) pair see identical values.  An optimizer
    failure at the proposed temperature rejects the proposal and is counted.
    Returns (state, accepted).
    """
    tau_new, log_q = model.propose_tau(state.tau, rng)
    if not 0.0 <= tau_new <= 1.0:
        return state, False
    ll_i, lp_i = prior.optimum_terms(state.tau)
    try:
        ll_s, lp_s = prior.optimum_terms(tau_new)
    except OptimizationError:
        prior.optimizer_failures += 1
        return state, False
    log_ratio = ((tau_new - state.tau) * state.log_lik
                 + (state.tau * ll_i + lp_i)
                 - (tau_new * ll_s + lp_s)
                 + log_q)
    if _accept(rng, log_ratio):
        return replace(state, tau=float(tau_new)), True
    return state, False


def pt_exchange_step(pair: PairState, rng):
    """Propose swapping theta between the two chains.  Returns (pair, exchanged).

    log alpha = (tau_1 - 1) * (log_lik(theta_2) - log_lik(theta_1)); the prior
    terms are common to both chains and cancel.  tau never moves.
    """
    t1, t2 = pair.tempered, pair.target
    log_alpha = (t1.tau - 1.0) * (t2.log_lik - t1.log_lik)
    if _accept(rng, log_alpha):
        swapped = PairState(
            tempered=ChainState(t2.theta, t1.tau, t2.log_lik, t2.log_prior),
            target=ChainState(t1.theta, 1.0, t1.log_lik, t1.log_prior),
        )
        return swapped, True
    return pair, False


def mutate_at_fixed_tau(model: TargetModel, state: ChainState, rng, style="mh"):
    """One mutation of theta at the state's tau: MH or a model Gibbs sweep."""
    if style == "gibbs":
        theta_new = model.gibbs_sweep(state.theta, state.tau, rng)
        return ChainState.from_theta(model, theta_new, state.tau), True
    return stwnc_theta_step(model, state, rng)


def pt_stwnc_iteration(model, pair: PairState, prior: ProfileTauPrior,
                       exchange_prob: float, rng,
                       tempered_style="mh", target_style="mh"):
    """One sweep of the two-chain hybrid.

    With probability ``exchange_prob`` an exchange is proposed; otherwise both
    chains mutate (the tempered chain takes its theta transition then its tau
    transition, the target chain one mutation at tau=1).

    Returns (pair, info) where info carries the per-move accept flags.
    """
    if not 0.0 <= exchange_prob <= 1.0:
        raise ValueError("exchange_prob must lie in [0, 1]")
    info = {"exchange_attempted": False, "exchanged": False,
            "tempered_theta": False, "tempered_tau": False, "target_theta": False}
    if rng.uniform() < exchange_prob:
        info["exchange_attempted"] = True
        pair, exchanged = pt_exchange_step(pair, rng)
        info["exchanged"] = exchanged
        return pair, info

    tempered, acc_theta = mutate_at_fixed_tau(model, pair.tempered, rng, tempered_style)
    tempered, acc_tau = stwnc_tau_step(model, tempered, prior, rng)
    target, acc_target = mutate_at_fixed_tau(model, pair.target, rng, target_style)
    info["tempered_theta"] = acc_theta
    info["tempered_tau"] = acc_tau
    info["target_theta"] = acc_target
    return PairState(tempered, target), info


# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------

@dataclass
class ChainTrace:
    """Column store of one chain's records; one row per iteration."""

    chain_id: str
    param_names: tuple
    iteration: np.ndarray
    tau: np.ndarray
    log_lik: np.ndarray
    accepted_theta: np.ndarray
    accepted_tau: np.ndarray
    exchanged: np.ndarray
    burn_in: np.ndarray
    params: np.ndarray            # (n, d) float; log_lik stored untempered

    def __len__(self):
        return int(self.iteration.size)

    def kept(self) -> "ChainTrace":
        """Post-burn-in view."""
        m = ~self.burn_in
        return ChainTrace(self.chain_id, self.param_names, self.iteration[m],
                          self.tau[m], self.log_lik[m], self.accepted_theta[m],
                          self.accepted_tau[m], self.exchanged[m],
                          self.burn_in[m], self.params[m])

    def records(self):
        for i in range(len(self)):
            yield TraceRecord(int(self.iteration[i]), self.chain_id,
                              ParameterVector(self.params[i]), float(self.tau[i]),
                              float(self.log_lik[i]), bool(self.accepted_theta[i]),
                              bool(self.accepted_tau[i]), bool(self.exchanged[i]),
                              bool(self.burn_in[i]))


class _TraceBuilder:
    def __init__(self, chain_id, param_names, capacity):
        self.chain_id = chain_id
        self.param_names = tuple(param_names)
        self.iteration = np.empty(capacity, dtype=np.int64)
        self.tau = np.empty(capacity)
        self.log_lik = np.empty(capacity)
        self.accepted_theta = np.zeros(capacity, dtype=bool)
        self.accepted_tau = np.zeros(capacity, dtype=bool)
        self.exchanged = np.zeros(capacity, dtype=bool)
        self.burn_in = np.zeros(capacity, dtype=bool)
        self.params = np.empty((capacity, len(self.param_names)))
        self._i = 0

    def add(self, iteration, state: ChainState, accepted_theta, accepted_tau,
            exchanged, burn_in):
        i = self._i
        self.iteration[i] = iteration
        self.tau[i] = state.tau
        self.log_lik[i] = state.log_lik
        self.accepted_theta[i] = accepted_theta
        self.accepted_tau[i] = accepted_tau
        self.exchanged[i] = exchanged
        self.burn_in[i] = burn_in
        self.params[i] = state.theta.as_row()
        self._i += 1

    def build(self) -> ChainTrace:
        n = self._i
        return ChainTrace(self.chain_id, self.param_names, self.iteration[:n],
                          self.tau[:n], self.log_lik[:n], self.accepted_theta[:n],
                          self.accepted_tau[:n], self.exchanged[:n],
                          self.burn_in[:n], self.params[:n])


@dataclass
class RunResult:
    model_name: str
    seed: int
    traces: dict
    acceptance: dict
    timings: dict
    optimizer_failures: int = 0
    schedule: tuple = ()
    settings: dict = field(default_factory=dict)


def _rng_for(seed, *key):
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key)))


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

def run_pt_stwnc(model: TargetModel, iterations, burn_in=0, exchange_prob=0.5,
                 seed=0, tau_prior: ProfileTauPrior | None = None,
                 optimizer_settings: OptimizerSettings | None = None,
                 tempered_style="mh", target_style="mh") -> RunResult:
    """Run the two-chain hybrid for ``iterations`` sweeps.

    Burn-in records are flagged, never dropped.  Deterministic for a fixed
    seed.  The tempered chain owns its optimum cache through ``tau_prior``
    (one is created if not supplied).
    """
    if burn_in < 0 or iterations < burn_in:
        raise ValueError("need iterations >= burn_in >= 0")
    t_start = time.perf_counter()
    rng = _rng_for(seed, 0)
    prior = tau_prior if tau_prior is not None else ProfileTauPrior(
        model, settings=optimizer_settings)

    theta1 = model.initial_theta(rng)
    theta2 = model.initial_theta(rng)
    tau1 = float(rng.uniform())
    pair = PairState(ChainState.from_theta(model, theta1, tau1),
                     ChainState.from_theta(model, theta2, 1.0))

    names = model.layout.names
    tempered_tb = _TraceBuilder(TEMPERED, names, iterations)
    target_tb = _TraceBuilder(TARGET, names, iterations)
    counts = {"exchange_attempted": 0, "exchanged": 0, "tempered_theta": 0,
              "tempered_tau": 0, "target_theta": 0, "mutations": 0}

    for i in range(iterations):
        pair, info = pt_stwnc_iteration(model, pair, prior, exchange_prob, rng,
                                        tempered_style, target_style)
        if info["exchange_attempted"]:
            counts["exchange_attempted"] += 1
            counts["exchanged"] += info["exchanged"]
        else:
            counts["mutations"] += 1
            counts["tempered_theta"] += info["tempered_theta"]
            counts["tempered_tau"] += info["tempered_tau"]
            counts["target_theta"] += info["target_theta"]
        flag = i < burn_in
        tempered_tb.add(i, pair.tempered, info["tempered_theta"], info["tempered_tau"],
                        info["exchanged"], flag)
        target_tb.add(i, pair.target, info["target_theta"], False,
                      info["exchanged"], flag)

    mut = max(counts["mutations"], 1)
    acceptance = {
        "tempered_theta": counts["tempered_theta"] / mut,
        "tempered_tau": counts["tempered_tau"] / mut,
        "target_theta": counts["target_theta"] / mut,
        "exchange": (counts["exchanged"] / counts["exchange_attempted"]
                     if counts["exchange_attempted"] else 0.0),
        "exchange_attempt_fraction": counts["exchange_attempted"] / max(iterations, 1),
    }
    return RunResult(
        model_name=model.name, seed=int(seed),
        traces={TEMPERED: tempered_tb.build(), TARGET: target_tb.build()},
        acceptance=acceptance,
        timings={"sampling_s": time.perf_counter() - t_start},
        optimizer_failures=prior.optimizer_failures,
        settings={"iterations": iterations, "burn_in": burn_in,
                  "exchange_prob": exchange_prob,
                  "tempered_style": tempered_style, "target_style": target_style,
                  "interpolated_prior": prior.interpolator is not None},
    )


def geometric_schedule(T: int):
    """tau_i = (i/T)^5 for i = 1..T; strictly increasing, ends exactly at 1."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return [(i / T) ** 5 for i in range(1, T + 1)]


def run_standard_pt(model: TargetModel, schedule, iterations, burn_in=0,
                    exchange_prob=0.5, seed=0) -> RunResult:
    """Classical parallel tempering on a fixed temperature schedule.

    Each iteration either proposes one exchange between a uniformly chosen
    adjacent pair (probability ``exchange_prob``) or mutates every chain by
    Metropolis-Hastings at its own temperature.  The untempered log likelihood
    of every chain is recorded every iteration.
    """
    schedule = [float(t) for t in schedule]
    if len(schedule) == 0:
        raise ValueError("schedule must be non-empty")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be strictly increasing")
    if schedule[-1] != 1.0:
        raise ValueError("schedule must end at tau = 1")
    if burn_in < 0 or iterations < burn_in:
        raise ValueError("need iterations >= burn_in >= 0")

    t_start = time.perf_counter()
    rng = _rng_for(seed, 0)
    T = len(schedule)
    states = [ChainState.from_theta(model, model.initial_theta(rng), tau)
              for tau in schedule]
    names = model.layout.names
    builders = [_TraceBuilder(f"pt_chain_{t}", names, iterations) for t in range(T)]
    accept_counts = np.zeros(T)
    mutation_rounds = 0
    exch_attempted = 0
    exch_accepted = 0

    for i in range(iterations):
        exchanged_pair = (-1, -1)
        if T > 1 and rng.uniform() < exchange_prob:
            exch_attempted += 1
            j = int(rng.integers(0, T - 1))
            a, b = states[j], states[j + 1]
            log_alpha = (a.tau - b.tau) * (b.log_lik - a.log_lik)
            if _accept(rng, log_alpha):
                states[j] = ChainState(b.theta, a.tau, b.log_lik, b.log_prior)
                states[j + 1] = ChainState(a.theta, b.tau, a.log_lik, a.log_prior)
                exch_accepted += 1
                exchanged_pair = (j, j + 1)
        else:
            mutation_rounds += 1
            for t in range(T):
                states[t], acc = stwnc_theta_step(model, states[t], rng)
                accept_counts[t] += acc
        flag = i < burn_in
        for t in range(T):
            builders[t].add(i, states[t], False, False,
                            t in exchanged_pair, flag)

    acceptance = {
        "theta_by_chain": (accept_counts / max(mutation_rounds, 1)).tolist(),
        "exchange": exch_accepted / exch_attempted if exch_attempted else 0.0,
        "exchange_attempt_fraction": exch_attempted / max(iterations, 1),
    }
    return RunResult(
        model_name=model.name, seed=int(seed),
        traces={b.chain_id: b.build() for b in builders},
        acceptance=acceptance,
        timings={"sampling_s": time.perf_counter() - t_start},
        schedule=tuple(schedule),
        settings={"iterations": iterations, "burn_in": burn_in,
                  "exchange_prob": exchange_prob, "T": T},
    )
