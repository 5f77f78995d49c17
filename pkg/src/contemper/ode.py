"""Adaptive Dormand-Prince 5(4) initial-value integration with dense output.

The stepper loop lives here so a likelihood that sits inside an optimizer can
call it tens of thousands of times without per-call framework overhead.  The
Butcher tableau and the quartic dense-output matrix are the standard DOPRI5
coefficients, taken as data from scipy's RK45.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45 as _RK45

# Dormand-Prince 5(4) tableau + dense-output coefficients (coefficients only;
# scipy's stepper object is not used).
_C = np.asarray(_RK45.C, dtype=float)        # (6,)  stage abscissae
_A = np.asarray(_RK45.A, dtype=float)        # (6,5) stage weights
_B = np.asarray(_RK45.B, dtype=float)        # (6,)  5th-order solution weights
_E = np.asarray(_RK45.E, dtype=float)        # (7,)  error weights (incl. FSAL stage)
_P = np.asarray(_RK45.P, dtype=float)        # (7,4) dense-output polynomial matrix

_MIN_STEP = 1e-12
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


class OdeFailure(RuntimeError):
    """Raised when step control underflows (step < 1e-12 time units)."""


@dataclass
class OdeProblem:
    """An initial-value problem evaluated at fixed output times.

    rhs(t, y) -> dy/dt, y0 the state at t0, and output_times a non-decreasing
    array of times >= t0 at which the dense solution is returned.
    """

    rhs: object
    y0: np.ndarray
    output_times: np.ndarray
    rtol: float = 1e-8
    atol: float = 1e-10
    t0: float = 0.0
    max_step: float = field(default=np.inf)

    def __post_init__(self):
        self.y0 = np.asarray(self.y0, dtype=float)
        self.output_times = np.asarray(self.output_times, dtype=float)
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if np.any(np.diff(self.output_times) < 0):
            raise ValueError("output times must be non-decreasing")
        if self.output_times.size and self.output_times[0] < self.t0:
            raise ValueError("output times must not precede t0")


def _initial_step(rhs, t0, y0, f0, rtol, atol):
    # Hairer/Norsett/Wanner-style starting step guess.
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = np.asarray(rhs(t0 + h0, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate(problem: OdeProblem) -> np.ndarray:
    """Integrate and return the states at ``problem.output_times``.

    Returns an array of shape (len(output_times), len(y0)).  Times equal to
    t0 return the initial state exactly; interior times are filled from the
    pair's quartic dense-output interpolant.
    """
    rhs = problem.rhs
    times = problem.output_times
    y = problem.y0.copy()
    n = y.size
    out = np.empty((times.size, n))
    if times.size == 0:
        return out

    t = problem.t0
    t_end = times[-1]
    idx = 0
    # emit any outputs at exactly t0
    while idx < times.size and times[idx] == t:
        out[idx] = y
        idx += 1
    if idx == times.size:
        return out

    f = np.asarray(rhs(t, y), dtype=float)
    if not np.all(np.isfinite(f)):
        raise ValueError("rhs not finite at the initial state")
    h = min(_initial_step(rhs, t, y, f, problem.rtol, problem.atol),
            problem.max_step, t_end - t)

    K = np.empty((7, n))
    while t < t_end:
        h = min(h, t_end - t, problem.max_step)
        if h < _MIN_STEP:
            raise OdeFailure(f"step size underflow at t={t!r} (h={h!r})")

        K[0] = f
        for s in range(1, 6):
            K[s] = rhs(t + _C[s] * h, y + h * (_A[s, :s] @ K[:s]))
        y_new = y + h * (_B @ K[:6])
        f_new = np.asarray(rhs(t + h, y_new), dtype=float)
        K[6] = f_new

        scale = problem.atol + problem.rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean((h * (_E @ K) / scale) ** 2))
        if not np.isfinite(err):
            err = np.inf

        if err <= 1.0:
            # dense output over [t, t+h]: y(t+theta*h) = y + h*Q @ [th,th^2,th^3,th^4]
            if idx < times.size and times[idx] <= t + h:
                Q = K.T @ _P
                while idx < times.size and times[idx] <= t + h:
                    theta = (times[idx] - t) / h
                    p = np.array([theta, theta**2, theta**3, theta**4])
                    out[idx] = y + h * (Q @ p)
                    idx += 1
            t += h
            y = y_new
            f = f_new
            factor = _MAX_FACTOR if err == 0 else min(
                _MAX_FACTOR, _SAFETY * err ** -0.2)
            h *= max(_MIN_FACTOR, factor)
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)

    # guard against times[-1] landing on t_end within round-off
    while idx < times.size:
        out[idx] = y
        idx += 1
    return out
