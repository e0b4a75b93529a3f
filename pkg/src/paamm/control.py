"""Optimal activeness as a discounted linear-quadratic control problem.

State: the linearized gap g_{n+1} = (1 - lam_n) g_n + eps_{n+1}. One-stage
cost: ((1 - lam)^2 + gamma*lam) g^2, the leading-order tracking error plus
gamma-weighted normalized LVR. With u = 1 - lam and discount factor
beta = e^(-rho*dt), the value function is the quadratic
V(g) = v2 g^2 + v1 g + v0 whose coefficients solve

    beta*v2^2 + (1 - beta*gamma)*v2 + (gamma^2/4 - gamma) = 0   (positive root)
    v1 * (2 + 2*beta*v2 - gamma*beta) = 2*gamma*beta*v2*m
    v0 * (1 - beta) = beta*(v2*s2 + v1*m) - beta^2*(2*v2*m + v1)^2 / (4*(1 + beta*v2))

with m = E[eps] and s2 = E[eps^2]. The greedy policy is the clipped feedback

    lam(g) = clip(1 - gamma/(2*(1+beta*v2)) + beta*(2*v2*m + v1)/(2*(1+beta*v2)) / g,
                  lam_lower, 1)

constant by continuity at g = 0, and converging as dt -> 0 to

    lam_star(gamma) = (1 + sqrt(1+2*gamma)) / (1 + gamma + sqrt(1+2*gamma)).

``value_iteration_oracle`` cross-checks all of this by brute force: it
iterates the Bellman operator on a state grid with Gauss-Hermite quadrature
for the Gaussian expectation and no quadratic ansatz anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ControlParams:
    """Problem data: LVR weight, discounting, price process, activeness floor."""

    gamma: float
    rho_disc: float
    dt: float
    mu: float = 0.0
    sigma: float = 0.0
    lambda_lower: float = 0.05

    def __post_init__(self):
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.rho_disc < 0.0:
            raise ValueError("discount rate must be nonnegative")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if not 0.0 < self.lambda_lower < 1.0:
            raise ValueError("lambda_lower must be in (0, 1)")

    @property
    def beta(self) -> float:
        return math.exp(-self.rho_disc * self.dt)

    @property
    def mean_eps(self) -> float:
        return self.mu * self.dt

    @property
    def second_moment_eps(self) -> float:
        return self.sigma ** 2 * self.dt + (self.mu * self.dt) ** 2

    @property
    def innovation_std(self) -> float:
        return self.sigma * math.sqrt(self.dt)

    @classmethod
    def from_beta(cls, gamma: float, beta: float, dt: float = 1.0, mu: float = 0.0,
                  sigma: float = 0.0, lambda_lower: float = 0.05) -> "ControlParams":
        """Build params from a discount factor beta = e^(-rho*dt) in (0, 1]."""
        if not 0.0 < beta <= 1.0:
            raise ValueError("beta must be in (0, 1]")
        return cls(gamma=gamma, rho_disc=-math.log(beta) / dt, dt=dt, mu=mu,
                   sigma=sigma, lambda_lower=lambda_lower)


@dataclass(frozen=True)
class RiccatiSolution:
    """Coefficients of the quadratic value function, with the beta they solve."""

    v2: float
    v1: float
    v0: float
    beta: float


def solve_riccati(params: ControlParams) -> RiccatiSolution:
    """Solve the three coefficient equations of the quadratic value function.

    The discriminant is computed in the expanded form
    1 + 2*beta*gamma + beta*(beta-1)*gamma^2, which is algebraically equal to
    (1-beta*gamma)^2 - beta*(gamma^2-4*gamma) but avoids cancellation of
    large terms. At beta = 1 it is 1 + 2*gamma > 0; for beta < 1 it turns
    negative once gamma exceeds (beta + sqrt(beta)) / (beta*(1-beta)), where
    the interior optimum leaves the admissible activeness range and no
    quadratic interior solution exists. That case raises ArithmeticError.

    For beta = 1 the v0 equation only has a finite solution when its
    right-hand side vanishes (zero-noise problems); otherwise the
    undiscounted value is infinite and a ValueError is raised.
    """
    gamma, beta = params.gamma, params.beta
    m, s2 = params.mean_eps, params.second_moment_eps
    disc = 1.0 + 2.0 * beta * gamma + beta * (beta - 1.0) * gamma * gamma
    if disc < 0.0:
        raise ArithmeticError(
            f"negative Riccati discriminant {disc}: no interior quadratic solution "
            f"for gamma={gamma} at beta={beta}"
        )
    v2 = (-(1.0 - beta * gamma) + math.sqrt(disc)) / (2.0 * beta)
    v1 = 2.0 * gamma * beta * v2 * m / (2.0 + 2.0 * beta * v2 - gamma * beta)
    rhs = beta * (v2 * s2 + v1 * m) - beta ** 2 * (2.0 * v2 * m + v1) ** 2 / (4.0 * (1.0 + beta * v2))
    if beta < 1.0:
        v0 = rhs / (1.0 - beta)
    elif abs(rhs) <= 1e-300:
        v0 = 0.0
    else:
        raise ValueError("undiscounted problem with noise has no finite constant term")
    return RiccatiSolution(v2=v2, v1=v1, v0=v0, beta=beta)


def riccati_residuals(sol: RiccatiSolution, params: ControlParams) -> tuple[float, float, float]:
    """Residuals of the three coefficient equations, for verification."""
    gamma, beta = params.gamma, sol.beta
    m, s2 = params.mean_eps, params.second_moment_eps
    r2 = beta * sol.v2 ** 2 + (1.0 - beta * gamma) * sol.v2 + (gamma ** 2 / 4.0 - gamma)
    r1 = sol.v1 * (2.0 + 2.0 * beta * sol.v2 - gamma * beta) - 2.0 * gamma * beta * sol.v2 * m
    r0 = sol.v0 * (1.0 - beta) - (
        beta * (sol.v2 * s2 + sol.v1 * m)
        - beta ** 2 * (2.0 * sol.v2 * m + sol.v1) ** 2 / (4.0 * (1.0 + beta * sol.v2))
    )
    return r2, r1, r0


def feedback_lambda(gap: float, sol: RiccatiSolution, params: ControlParams) -> float:
    """Clipped feedback activeness; the constant term by continuity at gap 0."""
    denom = 2.0 * (1.0 + sol.beta * sol.v2)
    lam = 1.0 - params.gamma / denom
    if gap != 0.0:
        lam += sol.beta * (2.0 * sol.v2 * params.mean_eps + sol.v1) / denom / gap
    return min(max(lam, params.lambda_lower), 1.0)


def lambda_star(gamma: float) -> float:
    """Small-dt optimal activeness (1 + sqrt(1+2g)) / (1 + g + sqrt(1+2g))."""
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    root = math.sqrt(1.0 + 2.0 * gamma)
    return (1.0 + root) / (1.0 + gamma + root)


def stationary_loss(activeness: float, gamma: float) -> float:
    """Leading-order per-block loss ((1-lam)^2 + gamma*lam) / (lam*(2-lam)).

    This drops the positive factors (sigma^2*dt and the weight constant)
    that do not move the argmin over activeness.
    """
    if not 0.0 < activeness <= 1.0:
        raise ValueError("activeness must be in (0, 1]")
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    lam = activeness
    return ((1.0 - lam) ** 2 + gamma * lam) / (lam * (2.0 - lam))


@dataclass(frozen=True)
class ValueIterationResult:
    state_grid: np.ndarray
    action_grid: np.ndarray  # u = 1 - lam values
    values: np.ndarray
    policy: np.ndarray       # greedy activeness per state
    sweeps: int

    @property
    def action_step(self) -> float:
        return float(self.action_grid[1] - self.action_grid[0])


def default_state_grid(params: ControlParams, n_std: float = 12.0, n_points: int = 240) -> np.ndarray:
    """Symmetric grid covering n_std stationary standard deviations.

    Uses an even point count so g = 0, where every action ties, is not a
    grid state.
    """
    if params.innovation_std <= 0.0:
        raise ValueError("state grid needs sigma > 0 to set its scale")
    lam = lambda_star(params.gamma)
    std = params.innovation_std / math.sqrt(lam * (2.0 - lam))
    half = n_std * std
    return np.linspace(-half, half, n_points)


def default_action_grid(params: ControlParams, n_points: int = 121) -> np.ndarray:
    return np.linspace(0.0, 1.0 - params.lambda_lower, n_points)


def value_iteration_oracle(params: ControlParams, state_grid: np.ndarray | None = None,
                           action_grid: np.ndarray | None = None, *,
                           quadrature_nodes: int = 40, tol: float = 1e-10,
                           max_sweeps: int = 100_000) -> ValueIterationResult:
    """Brute-force grid solution of the Bellman equation.

    V(g) = min_u {(u^2 - gamma*u + gamma) g^2 + beta E[V(u g + eps)]} is
    iterated to a sup-norm change below ``tol``. The Gaussian expectation
    uses Gauss-Hermite quadrature; off-grid evaluations interpolate V
    through the three nearest grid points (exact on quadratics, so the grid
    introduces no systematic curvature bias) and extrapolate past the edges
    with a quadratic fitted to the outer quarter of the grid each sweep.
    Convergence of the plain iteration is geometric at rate beta, which is
    slow for beta near 1, so each sweep applies the standard error-bound
    midpoint correction beta/(1-beta) * (min dV + max dV)/2; this removes
    the constant error mode exactly and leaves the quadratic mode, which
    contracts much faster.

    Raises RuntimeError if ``max_sweeps`` is hit, which signals a grid or
    discount configuration error.
    """
    gamma, beta = params.gamma, params.beta
    m = params.mean_eps
    sig_eps = params.innovation_std
    gs = default_state_grid(params) if state_grid is None else np.asarray(state_grid, dtype=float)
    us = default_action_grid(params) if action_grid is None else np.asarray(action_grid, dtype=float)
    n_g = gs.size
    if n_g < 8 or us.size < 2:
        raise ValueError("state grid needs >= 8 points and action grid >= 2")
    h = gs[1] - gs[0]
    if not np.allclose(np.diff(gs), h, rtol=1e-9, atol=0.0):
        raise ValueError("state grid must be uniformly spaced")

    nodes, weights = np.polynomial.hermite.hermgauss(quadrature_nodes)
    quad_w = weights / math.sqrt(math.pi)

    # next-state positions are fixed across sweeps: precompute interpolation stencils
    z = us[:, None, None] * gs[None, :, None] + m + math.sqrt(2.0) * sig_eps * nodes[None, None, :]
    inside = (z >= gs[0]) & (z <= gs[-1])
    center = np.clip(np.rint((z - gs[0]) / h).astype(np.int64), 1, n_g - 2)
    offset = (z - gs[center]) / h
    w_minus = 0.5 * offset * (offset - 1.0)
    w_center = (1.0 - offset) * (1.0 + offset)
    w_plus = 0.5 * offset * (offset + 1.0)
    outside = ~inside
    any_outside = bool(outside.any())
    z_out = z[outside]
    n_outer = max(n_g // 4, 3)
    outer_g = np.concatenate([gs[:n_outer], gs[-n_outer:]])

    stage = (us[:, None] ** 2 - gamma * us[:, None] + gamma) * gs[None, :] ** 2

    def apply_bellman(values: np.ndarray) -> np.ndarray:
        v_next = values[center - 1] * w_minus + values[center] * w_center + values[center + 1] * w_plus
        if any_outside:
            c2, c1, c0 = np.polyfit(outer_g, np.concatenate([values[:n_outer], values[-n_outer:]]), 2)
            v_next[outside] = (c2 * z_out + c1) * z_out + c0
        return stage + beta * (v_next @ quad_w)

    values = np.zeros(n_g)
    accel = beta / (1.0 - beta) if beta < 1.0 else 0.0
    for sweep in range(1, max_sweeps + 1):
        updated = apply_bellman(values).min(axis=0)
        change = updated - values
        lo, hi = float(change.min()), float(change.max())
        values = updated + accel * 0.5 * (lo + hi)
        if max(abs(lo), abs(hi)) < tol:
            break
    else:
        raise RuntimeError(f"value iteration did not converge within {max_sweeps} sweeps")

    policy = 1.0 - us[apply_bellman(values).argmin(axis=0)]
    return ValueIterationResult(state_grid=gs, action_grid=us, values=values,
                                policy=policy, sweeps=sweep)
