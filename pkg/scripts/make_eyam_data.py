#!/usr/bin/env python3
"""Regenerate the bundled Eyam-window SIR dataset (seeded, deterministic).

The original 1666 grave-digger ledger is not redistributable, so the bundled
series is a model-based reconstruction calibrated to the historical outbreak:
N = 261 quarantined, I(0) = 4, death rate alpha fixed, transmission beta
solved by bisection so roughly one infected person remains on day 135 (the
likelihood's infected constraints are 1 on day 135 and 0 on day 136).  Daily
cumulative deaths are then drawn through the model's own observation law,
y_t ~ Binomial(N, R(t)/N).

Run from the repository root:  python3 scripts/make_eyam_data.py
"""
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from contemper.ode import OdeProblem, integrate  # noqa: E402

N = 261
I0_TRUE = 4
ALPHA_TRUE = 0.11
N_DAYS = 136
SEED = 20250711
OUT = pathlib.Path(__file__).resolve().parents[1] / \
    "src/contemper/models/data/eyam_cumulative_deaths.csv"


def solve(alpha, beta, i0, days):
    def rhs(t, u):
        s, i = u[0], u[1]
        si = beta * s * i
        return np.array([-si, si - alpha * i, alpha * i])

    ts = np.arange(1.0, days + 1.0)
    return integrate(OdeProblem(rhs, np.array([N - i0, float(i0), 0.0]), ts,
                                rtol=1e-10, atol=1e-12))


def infected_on_day_135(beta):
    return solve(ALPHA_TRUE, beta, I0_TRUE, N_DAYS)[-2, 1]


def calibrate_beta():
    # I(135) decreases in beta once the epidemic completes inside the window
    lo, hi = 1.15 * ALPHA_TRUE / N, 2.6 * ALPHA_TRUE / N
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if infected_on_day_135(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def main():
    beta = calibrate_beta()
    states = solve(ALPHA_TRUE, beta, I0_TRUE, N_DAYS)
    print(f"alpha={ALPHA_TRUE} beta={beta:.8g} R0={beta * (N - I0_TRUE) / ALPHA_TRUE:.3f}")
    print(f"I(135)={states[-2, 1]:.3f} I(136)={states[-1, 1]:.3f} "
          f"R(136)={states[-1, 2]:.1f}")

    rng = np.random.default_rng(SEED)
    p = np.clip(states[:, 2] / N, 0.0, 1.0)
    deaths = rng.binomial(N, p)

    lines = ["day,cumulative_deaths"]
    lines += [f"{d},{c}" for d, c in zip(range(1, N_DAYS + 1), deaths)]
    OUT.write_text("\n".join(lines) + "\n")
    print(f"wrote {OUT} (final count {deaths[-1]})")


if __name__ == "__main__":
    main()
