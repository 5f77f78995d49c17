import numpy as np
import pytest

from contemper.optimize import (
    OptimizationError,
    OptimizerSettings,
    coordinate_maximize,
    discrete_line_search,
    nelder_mead,
)

TIGHT = OptimizerSettings(tolerance=1e-10, max_iterations=2000)


def test_quadratic_bowl_1d():
    x, v = nelder_mead(lambda x: -(x[0] - 3.0) ** 2, np.array([0.0]), TIGHT)
    assert abs(x[0] - 3.0) < 1e-4
    assert v > -1e-8


def test_quadratic_bowl_2d():
    x, _ = nelder_mead(lambda x: -(x[0] - 1.0) ** 2 - (x[1] + 2.0) ** 2,
                       np.array([0.5, 0.5]), TIGHT)
    assert np.allclose(x, [1.0, -2.0], atol=1e-4)


def test_nelder_mead_rejects_non_finite_start():
    with pytest.raises(ValueError):
        nelder_mead(lambda x: np.inf if x[0] > 0 else -np.inf, np.array([1.0]))


def test_nelder_mead_result_is_local_max():
    objective = lambda x: -(x[0] - 1.3) ** 2 - 0.5 * (x[1] - 0.7) ** 4
    x, v = nelder_mead(objective, np.array([0.0, 0.0]), TIGHT)
    for j in range(2):
        for sign in (-1.0, 1.0):
            probe = x.copy()
            probe[j] += sign * 1e-4 * max(abs(probe[j]), 1.0)
            assert objective(probe) <= v + TIGHT.tolerance


def test_coordinate_maximize_single_block_converges_immediately():
    update = lambda x: np.array([7.0])
    out = coordinate_maximize([update], np.array([0.0]),
                              OptimizerSettings(tolerance=1e-6, max_iterations=10))
    assert out[0] == 7.0


def test_coordinate_maximize_already_optimal_terminates_one_sweep():
    calls = []

    def update(x):
        calls.append(1)
        return x

    out = coordinate_maximize([update], np.array([2.0]),
                              OptimizerSettings(tolerance=1e-6, max_iterations=50))
    assert out[0] == 2.0
    assert len(calls) == 1


def test_coordinate_matches_nelder_mead_on_quadratic():
    # separable-ish quadratic: f = -(x-2)^2 - 2(y-x/2)^2 with exact conditionals
    def objective(z):
        return -(z[0] - 2.0) ** 2 - 2.0 * (z[1] - z[0] / 2.0) ** 2

    def update_x(z):
        # argmax_x: derivative -2(x-2) + 2(y - x/2) = 0 -> x = (4 + 2y)/3... solve:
        # d/dx [-(x-2)^2 - 2(y-x/2)^2] = -2(x-2) + 2(y-x/2) = 0 -> 3x/2 = 2 + y
        return np.array([(2.0 + z[1]) * 2.0 / 3.0, z[1]])

    def update_y(z):
        return np.array([z[0], z[0] / 2.0])

    fixed = coordinate_maximize([update_x, update_y], np.array([0.0, 0.0]),
                                OptimizerSettings(tolerance=1e-8, max_iterations=500),
                                objective=objective)
    nm, _ = nelder_mead(objective, np.array([0.0, 0.0]), TIGHT)
    assert np.allclose(fixed, nm, atol=1e-3)


def test_coordinate_maximize_monotone_ascent_guard():
    # a deliberately wrong "updater" that decreases the objective trips the guard
    objective = lambda z: -z[0] ** 2

    def bad_update(z):
        return z + 1.0

    with pytest.raises(OptimizationError):
        coordinate_maximize([bad_update], np.array([0.0]),
                            OptimizerSettings(tolerance=1e-12, max_iterations=5),
                            objective=objective)


def test_discrete_line_search_single_candidate():
    best_k, x, v = discrete_line_search([4], lambda k: (np.array([k + 0.5]), -float(k)))
    assert best_k == 4 and x[0] == 4.5 and v == -4.0


def test_discrete_line_search_quadratic_over_candidates():
    best_k, _, _ = discrete_line_search(
        range(1, 9), lambda k: (np.empty(0), -(k - 5.0) ** 2))
    assert best_k == 5


def test_discrete_line_search_matches_brute_force(rng):
    for _ in range(25):
        vals = {k: float(rng.normal()) for k in range(1, 9)}
        best_k, _, best_v = discrete_line_search(
            list(vals), lambda k: (np.empty(0), vals[k]))
        brute = max(sorted(vals), key=lambda k: vals[k])
        assert best_k == brute and best_v == vals[brute]


def test_discrete_line_search_tie_breaks_to_smaller():
    best_k, _, _ = discrete_line_search([3, 7], lambda k: (np.empty(0), 1.0))
    assert best_k == 3


def test_discrete_line_search_all_non_finite():
    with pytest.raises(OptimizationError):
        discrete_line_search([1, 2], lambda k: (np.empty(0), -np.inf))
