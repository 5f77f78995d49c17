import numpy as np
import pytest

from contemper.ode import OdeFailure, OdeProblem, integrate

N = 261.0


def _decay_problem(alpha, i0=5.0, rtol=1e-9, atol=1e-14, days=136):
    # SIR with beta = 0: S constant, I(t) = I0 e^{-alpha t}, R = I0 (1 - e^{-alpha t})
    def rhs(t, u):
        i = u[1]
        return np.array([0.0, -alpha * i, alpha * i])

    times = np.arange(1.0, days + 1.0)
    return OdeProblem(rhs, np.array([N - i0, i0, 0.0]), times, rtol=rtol, atol=atol), times


def test_zero_rhs_constant_trajectory():
    problem = OdeProblem(lambda t, u: np.zeros(3), np.array([1.0, 2.0, 3.0]),
                         np.linspace(0, 10, 7))
    sol = integrate(problem)
    assert np.array_equal(sol, np.tile([1.0, 2.0, 3.0], (7, 1)))


def test_output_at_t0_is_initial_state_exactly():
    problem, _ = _decay_problem(0.05)
    problem.output_times = np.array([0.0, 1.0, 2.0])
    sol = integrate(problem)
    assert np.array_equal(sol[0], problem.y0)


def test_linear_decay_closed_form():
    alpha, i0 = 0.05, 5.0
    problem, times = _decay_problem(alpha, i0)
    sol = integrate(problem)
    exact_i = i0 * np.exp(-alpha * times)
    exact_r = i0 * (1.0 - np.exp(-alpha * times))
    assert np.max(np.abs(sol[:, 1] - exact_i) / exact_i) < 1e-8
    assert np.max(np.abs(sol[:, 2] - exact_r)) < 1e-8 * i0
    assert np.allclose(sol[:, 0], N - i0, rtol=0, atol=1e-9)


def test_conservation_of_state_sum():
    # derivatives sum to zero, so S+I+R is conserved
    beta, alpha, i0 = 6.7e-4, 0.11, 4.0

    def rhs(t, u):
        s, i = u[0], u[1]
        si = beta * s * i
        return np.array([-si, si - alpha * i, alpha * i])

    times = np.arange(1.0, 137.0)
    sol = integrate(OdeProblem(rhs, np.array([N - i0, i0, 0.0]), times,
                               rtol=1e-8, atol=1e-10))
    assert np.max(np.abs(sol.sum(axis=1) - N)) < 1e-6


def test_tolerance_self_consistency():
    # halving tolerances moves the solution by less than the coarser tolerance
    beta, alpha, i0 = 6.7e-4, 0.11, 4.0

    def rhs(t, u):
        s, i = u[0], u[1]
        si = beta * s * i
        return np.array([-si, si - alpha * i, alpha * i])

    times = np.arange(1.0, 137.0)
    y0 = np.array([N - i0, i0, 0.0])
    coarse = integrate(OdeProblem(rhs, y0, times, rtol=1e-6, atol=1e-8))
    fine = integrate(OdeProblem(rhs, y0, times, rtol=5e-7, atol=5e-9))
    # agreement within the coarser tolerance on the state scale the
    # controller works against
    assert np.max(np.abs(coarse - fine)) < 1e-6 * np.max(np.abs(coarse))


def test_step_underflow_raises():
    # a blow-up inside the window forces the controller below the step floor
    def rhs(t, u):
        return np.array([u[0] ** 2])

    problem = OdeProblem(rhs, np.array([1.0]), np.array([0.5, 2.0]),
                         rtol=1e-9, atol=1e-12)
    with pytest.raises(OdeFailure):
        integrate(problem)


def test_non_finite_initial_rhs_rejected():
    problem = OdeProblem(lambda t, u: np.array([np.nan]), np.array([1.0]),
                         np.array([1.0]))
    with pytest.raises(ValueError):
        integrate(problem)


def test_input_validation():
    with pytest.raises(ValueError):
        OdeProblem(lambda t, u: u, np.array([1.0]), np.array([2.0, 1.0]))
    with pytest.raises(ValueError):
        OdeProblem(lambda t, u: u, np.array([1.0]), np.array([1.0]), rtol=0.0)
    with pytest.raises(ValueError):
        OdeProblem(lambda t, u: u, np.array([1.0]), np.array([-1.0]))
