import math
from statistics import NormalDist

import numpy as np
import pytest

from paamm.control import (ControlParams, default_action_grid, default_state_grid,
                           feedback_lambda, lambda_star, riccati_residuals,
                           solve_riccati, stationary_loss, value_iteration_oracle)

GAMMA_GRID = np.logspace(-3, 3, 61)


def residual_scales(sol, params):
    """Tolerance scales of the three coefficient equations."""
    scale2 = max(1.0, sol.v2 ** 2)
    scale1 = max(1.0, abs(2 * params.gamma * sol.beta * sol.v2 * params.mean_eps))
    scale0 = max(1.0, abs(sol.v0))
    return scale2, scale1, scale0


def test_params_validation():
    with pytest.raises(ValueError):
        ControlParams(gamma=-1, rho_disc=0.1, dt=0.1)
    with pytest.raises(ValueError):
        ControlParams(gamma=1, rho_disc=0.1, dt=0.0)
    with pytest.raises(ValueError):
        ControlParams(gamma=1, rho_disc=0.1, dt=0.1, lambda_lower=0.0)
    with pytest.raises(ValueError):
        ControlParams.from_beta(1.0, 1.5)


def test_riccati_zero_gamma():
    sol = solve_riccati(ControlParams.from_beta(0.0, 0.95))
    assert sol.v2 == 0.0
    assert sol.v1 == 0.0
    assert sol.v0 == 0.0


def test_riccati_known_root():
    # beta = 1, gamma = 4: v2 = (gamma - 1 + sqrt(1 + 2 gamma)) / 2 = 3
    sol = solve_riccati(ControlParams.from_beta(4.0, 1.0))
    assert sol.v2 == pytest.approx(3.0, rel=1e-15)


def test_riccati_residuals_small_with_drift():
    params = ControlParams(gamma=2.0, rho_disc=0.05, dt=0.01, mu=0.1, sigma=0.5)
    sol = solve_riccati(params)
    r2, r1, r0 = riccati_residuals(sol, params)
    s2, s1, s0 = residual_scales(sol, params)
    assert abs(r2) <= 1e-12 * s2
    assert abs(r1) <= 1e-12 * s1
    assert abs(r0) <= 1e-12 * s0
    assert sol.v2 > 0
    assert sol.v1 != 0.0


def test_riccati_residual_grid():
    solvable = 0
    for beta in (0.9, 0.99, 0.999, 1.0):
        for gamma in GAMMA_GRID:
            params = ControlParams.from_beta(float(gamma), beta, dt=0.01, mu=0.2, sigma=0.5) \
                if beta < 1.0 else ControlParams.from_beta(float(gamma), beta)
            if 1.0 + 2 * beta * gamma + beta * (beta - 1.0) * gamma ** 2 < 0.0:
                # interior optimum infeasible: the solver must refuse
                with pytest.raises(ArithmeticError):
                    solve_riccati(params)
                continue
            sol = solve_riccati(params)
            solvable += 1
            r2, r1, r0 = riccati_residuals(sol, params)
            s2, s1, s0 = residual_scales(sol, params)
            assert abs(r2) <= 1e-12 * s2
            assert abs(r1) <= 1e-12 * s1
            assert abs(r0) <= 1e-12 * s0
            assert sol.v2 >= 0.0
    assert solvable > 150


def test_riccati_infeasible_threshold():
    # beta < 1 loses the interior solution once gamma passes
    # (beta + sqrt(beta)) / (beta * (1 - beta))
    beta = 0.9
    threshold = (beta + math.sqrt(beta)) / (beta * (1.0 - beta))
    solve_riccati(ControlParams.from_beta(threshold * 0.999, beta))
    with pytest.raises(ArithmeticError):
        solve_riccati(ControlParams.from_beta(threshold * 1.001, beta))


def test_riccati_undiscounted_with_noise_raises():
    with pytest.raises(ValueError):
        solve_riccati(ControlParams.from_beta(2.0, 1.0, sigma=1.0, dt=1e-4))


def test_feedback_constant_when_drift_free():
    params = ControlParams.from_beta(4.0, 0.99)
    sol = solve_riccati(params)
    constant = 1.0 - 4.0 / (2.0 * (1.0 + sol.beta * sol.v2))
    for gap in (-0.5, -1e-6, 0.0, 1e-6, 0.5):
        assert feedback_lambda(gap, sol, params) == pytest.approx(constant, rel=1e-14)


def test_feedback_known_value():
    params = ControlParams.from_beta(4.0, 1.0)
    sol = solve_riccati(params)
    assert feedback_lambda(0.0, sol, params) == pytest.approx(0.5, rel=1e-14)


def test_feedback_clips_to_floor():
    params = ControlParams.from_beta(1000.0, 0.999, lambda_lower=0.05)
    sol = solve_riccati(params)
    assert 1.0 - params.gamma / (2.0 * (1.0 + sol.beta * sol.v2)) < 0.05
    assert feedback_lambda(0.0, sol, params) == 0.05
    assert feedback_lambda(0.3, sol, params) >= 0.05


def test_lambda_star_exact_values():
    assert lambda_star(0.0) == 1.0
    assert lambda_star(4.0) == 0.5
    assert lambda_star(12.0) == 1.0 / 3.0


def test_lambda_star_strictly_decreasing_and_vanishing():
    grid = np.linspace(0.0, 10.0, 1000)
    values = [lambda_star(g) for g in grid]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert lambda_star(1e6) < 0.01


def test_lambda_star_is_argmin_of_stationary_loss():
    grid = np.round(np.arange(0.01, 1.001, 0.01), 2)
    losses = [stationary_loss(lam, 4.0) for lam in grid]
    assert grid[int(np.argmin(losses))] == pytest.approx(0.5, abs=1e-12)
    for gamma in (1.0, 12.0, 30.0):  # grid argmin lands on the nearest grid point
        losses = [stationary_loss(lam, gamma) for lam in grid]
        assert abs(grid[int(np.argmin(losses))] - lambda_star(gamma)) <= 0.005 + 1e-12


def test_stationary_loss_values():
    assert stationary_loss(0.5, 4.0) == pytest.approx(3.0, rel=1e-15)
    grid = np.round(np.arange(0.01, 1.001, 0.01), 2)
    losses = [stationary_loss(lam, 0.0) for lam in grid]
    assert grid[int(np.argmin(losses))] == 1.0
    assert min(losses) == 0.0


def test_stationary_loss_argmin_scale_invariant():
    grid = np.linspace(0.01, 1.0, 100)
    base = np.array([stationary_loss(lam, 4.0) for lam in grid])
    argmin = int(np.argmin(base))
    for scale in (1e-6, 3.7, 1e6):
        assert int(np.argmin(scale * base)) == argmin


def test_value_iteration_zero_gamma():
    params = ControlParams(gamma=0.0, rho_disc=100.0, dt=1e-4, sigma=1.0)
    result = value_iteration_oracle(params)
    assert np.max(np.abs(result.values)) <= 1e-9
    assert np.all(result.policy == 1.0)


def test_value_iteration_matches_riccati():
    params = ControlParams.from_beta(4.0, 0.999, dt=1e-4, sigma=1.0)
    sol = solve_riccati(params)
    result = value_iteration_oracle(params)
    inner = np.abs(result.state_grid) <= result.state_grid[-1] / 2
    fitted = np.polyfit(result.state_grid[inner], result.values[inner], 2)[0]
    assert fitted == pytest.approx(sol.v2, rel=0.01)


def test_value_iteration_policy_matches_feedback():
    for gamma, beta, mu in ((4.0, 0.999, 0.0), (1.0, 0.99, 0.0), (4.0, 0.99, 0.05)):
        params = ControlParams.from_beta(gamma, beta, dt=1e-4, mu=mu, sigma=1.0)
        sol = solve_riccati(params)
        result = value_iteration_oracle(params)
        reference = np.array([feedback_lambda(g, sol, params) for g in result.state_grid])
        deviation = np.abs(result.policy - reference)[1:-1]
        assert deviation.max() <= result.action_step * (1 + 1e-9)


def test_default_grids():
    params = ControlParams.from_beta(4.0, 0.99, dt=1e-4, sigma=1.0)
    gs = default_state_grid(params, n_std=12.0, n_points=240)
    assert gs.size == 240
    assert gs[0] == -gs[-1]
    assert not np.any(gs == 0.0)  # ties at the origin stay off the grid
    lam = lambda_star(4.0)
    std = math.sqrt(1e-4 / (lam * (2 - lam)))
    assert gs[-1] == pytest.approx(12 * std, rel=1e-12)
    us = default_action_grid(params, n_points=96)
    assert us[0] == 0.0
    assert us[-1] == pytest.approx(0.95)
    with pytest.raises(ValueError):
        default_state_grid(ControlParams.from_beta(4.0, 0.99))


def test_value_iteration_nonconvergence_raises():
    params = ControlParams.from_beta(4.0, 0.999, dt=1e-4, sigma=1.0)
    with pytest.raises(RuntimeError):
        value_iteration_oracle(params, max_sweeps=2)


def test_feedback_approaches_limit_at_sqrt_dt_rate():
    # deviation of the feedback policy from its small-dt limit, sampled on
    # deterministic stationary quantiles with shared normal scores: the RMS
    # deviation halves when dt is quartered
    scores = np.array([NormalDist().inv_cdf((i + 0.5) / 200) for i in range(200)])
    gamma, mu, sigma = 2.0, 0.05, 1.0
    limit = lambda_star(gamma)
    rms = {}
    for dt in (1e-4, 2.5e-5):
        params = ControlParams(gamma=gamma, rho_disc=0.01, dt=dt, mu=mu, sigma=sigma)
        sol = solve_riccati(params)
        mean_g = params.mean_eps / limit
        std_g = params.innovation_std / math.sqrt(limit * (2 - limit))
        gaps = mean_g + std_g * scores
        devs = [feedback_lambda(g, sol, params) - limit for g in gaps]
        rms[dt] = math.sqrt(float(np.mean(np.square(devs))))
    assert 0.35 <= rms[2.5e-5] / rms[1e-4] <= 0.65
