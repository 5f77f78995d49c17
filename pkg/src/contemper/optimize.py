"""Maximizers used when evaluating the profile optimum: Nelder-Mead simplex,
coordinate-wise conditional maximization with closed-form updates, and
exhaustive line search over a discrete coordinate."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OptimizationError(RuntimeError):
    """Raised on non-convergence; carries the best point found so far."""

    def __init__(self, message, best_x=None, best_value=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_value = best_value


@dataclass(frozen=True)
class OptimizerSettings:
    tolerance: float = 1e-3          # function-value / coordinate-change stop
    max_iterations: int = 500
    simplex_scale: float = 0.05      # relative initial simplex step

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def nelder_mead(objective, x0, settings: OptimizerSettings = OptimizerSettings()):
    """Maximize ``objective`` with a Nelder-Mead simplex.

    Standard coefficients (reflect 1, expand 2, contract 0.5, shrink 0.5),
    maximization done by minimizing the negation.  Stops when the spread of
    simplex function values drops below ``settings.tolerance`` or after
    ``settings.max_iterations`` iterations.  Returns (argmax, value).
    """
    x0 = np.asarray(x0, dtype=float)
    f0 = objective(x0)
    if not np.isfinite(f0):
        raise ValueError("objective not finite at x0")

    d = x0.size
    step = settings.simplex_scale
    simplex = [x0]
    for j in range(d):
        v = x0.copy()
        v[j] += max(step * abs(x0[j]), step)
        simplex.append(v)
    simplex = np.asarray(simplex)
    fvals = np.array([f0] + [_safe_eval(objective, simplex[j + 1]) for j in range(d)])

    n_eval = d + 1
    for _ in range(settings.max_iterations):
        order = np.argsort(-fvals)           # descending: best first
        simplex, fvals = simplex[order], fvals[order]
        # f-spread alone stalls on brackets symmetric about the optimum, so
        # the vertices must also have collapsed onto each other
        if (fvals[0] - fvals[-1] < settings.tolerance
                and np.max(np.abs(simplex - simplex[0])) < settings.tolerance):
            break

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = _safe_eval(objective, xr)
        n_eval += 1

        if fr > fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = _safe_eval(objective, xe)
            n_eval += 1
            if fe > fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr > fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = _safe_eval(objective, xc)
            n_eval += 1
            if fc > fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for j in range(1, d + 1):
                    simplex[j] = simplex[0] + 0.5 * (simplex[j] - simplex[0])
                    fvals[j] = _safe_eval(objective, simplex[j])
                n_eval += d

    best = int(np.argmax(fvals))
    return simplex[best].copy(), float(fvals[best])


def _safe_eval(objective, x):
    v = objective(x)
    return -np.inf if not np.isfinite(v) else float(v)


def coordinate_maximize(conditional_updaters, x0, settings: OptimizerSettings = OptimizerSettings(),
                        objective=None):
    """Cycle exact conditional-argmax updaters until the iterate stops moving.

    Each updater maps the full vector to a new full vector with its coordinate
    block replaced by the conditional argmax given the rest.  Stops when the
    max absolute coordinate change over a full sweep is below
    ``settings.tolerance``.  If ``objective`` is given, ascent is asserted
    after every update.
    """
    x = np.asarray(x0, dtype=float).copy()
    prev_obj = objective(x) if objective is not None else None
    for _ in range(settings.max_iterations):
        x_old = x.copy()
        for update in conditional_updaters:
            x = np.asarray(update(x), dtype=float)
            if objective is not None:
                val = objective(x)
                if val < prev_obj - 1e-9:
                    raise OptimizationError(
                        "conditional update decreased the objective", x, val)
                prev_obj = val
        if np.max(np.abs(x - x_old)) < settings.tolerance:
            return x
    raise OptimizationError(
        f"coordinate maximization did not settle in {settings.max_iterations} sweeps",
        best_x=x, best_value=prev_obj)


def discrete_line_search(candidates, continuous_maximizer):
    """Exhaustive search over integer candidates with a conditional continuous fit.

    ``continuous_maximizer(k)`` returns (x_k, value_k) for candidate k; the
    overall argmax is returned as (best_k, best_x, best_value).  Ties break
    toward the smaller integer.
    """
    if len(candidates) == 0:
        raise ValueError("candidates must be non-empty")
    best = None
    for k in sorted(int(c) for c in candidates):
        x_k, val_k = continuous_maximizer(k)
        if not np.isfinite(val_k):
            continue
        if best is None or val_k > best[2]:
            best = (k, x_k, float(val_k))
    if best is None:
        raise OptimizationError("all discrete candidates evaluated non-finite")
    return best
