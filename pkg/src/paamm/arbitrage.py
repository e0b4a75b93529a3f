"""Frictionless competitive arbitrage and the one-block gap map.

With zero fees and gas, competing risk-neutral arbitrageurs move the active
reserves along their level set until the pool's spot price equals the true
price. For the geometric-mean curve the resulting map from the top-of-block
gap g (log true price minus pre-trade pool log price) to the post-trade,
post-merge gap has the closed form

    psi(g) = g - log(1 - lam + lam*e^(theta*g)) + log(1 - lam + lam*e^(-(1-theta)*g))

independent of the price level and of liquidity (homogeneity). psi is a
contraction: 0 <= psi'(g) <= rho = 1 - lam*min(theta, 1-theta) < 1 for
lam < 1, and psi vanishes identically at lam = 1.

The log terms are evaluated as log1p(lam * expm1(.)), which stays accurate
for the small gaps (|g| ~ 1e-3) a simulation visits.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .curves import InvariantCurve, PricePoint, Reserves


def _check_params(activeness: float, theta: float) -> None:
    if not 0.0 < activeness <= 1.0:
        raise ValueError(f"activeness must be in (0, 1], got {activeness}")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must be in (0, 1), got {theta}")


def _as_scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def arbitrage_trade(curve: InvariantCurve, active: Reserves, log_true_price: float) -> Reserves:
    """Active reserves after the optimal price-closing trade.

    The trade keeps the invariant constant and lands the marginal price on
    the true price; for closed-form curves this is just the reparametrization
    at the current liquidity.
    """
    liquidity = curve.invariant(active)
    return curve.reserves_from(PricePoint(liquidity, log_true_price))


def psi(gap, activeness: float, theta: float):
    """Post-arbitrage-and-merge gap produced by a top-of-block gap.

    Accepts a scalar or an array of gaps.
    """
    _check_params(activeness, theta)
    g = np.asarray(gap, dtype=float)
    up = np.log1p(activeness * np.expm1(theta * g))
    down = np.log1p(activeness * np.expm1(-(1.0 - theta) * g))
    return _as_scalar_or_array(g - up + down)


def psi_prime(gap, activeness: float, theta: float):
    """Derivative of :func:`psi`; lies in [0, 1 - activeness*min(theta, 1-theta)]."""
    _check_params(activeness, theta)
    g = np.asarray(gap, dtype=float)
    eu = np.exp(theta * g)
    ed = np.exp(-(1.0 - theta) * g)
    term_up = activeness * theta * eu / (1.0 + activeness * np.expm1(theta * g))
    term_down = activeness * (1.0 - theta) * ed / (1.0 + activeness * np.expm1(-(1.0 - theta) * g))
    return _as_scalar_or_array(1.0 - term_up - term_down)


def contraction_bound(activeness: float, theta: float) -> float:
    """Contraction modulus rho = 1 - activeness * min(theta, 1 - theta)."""
    _check_params(activeness, theta)
    return 1.0 - activeness * min(theta, 1.0 - theta)


def merged_log_price(prev_log_price, gap, activeness: float, theta: float):
    """Log marginal price of the merged totals after arbitrage at gap ``gap``.

    Consistent with psi: the new gap (prev_log_price + gap) - merged price
    equals psi(gap).
    """
    _check_params(activeness, theta)
    g = np.asarray(gap, dtype=float)
    up = np.log1p(activeness * np.expm1(theta * g))
    down = np.log1p(activeness * np.expm1(-(1.0 - theta) * g))
    return _as_scalar_or_array(prev_log_price + up - down)


class GapState(NamedTuple):
    """Pre- and post-arbitrage log price gaps of one block."""

    top_gap: float
    bot_gap: float


def close_gap(gap: float, activeness: float, theta: float) -> GapState:
    """One block of arbitrage summarized as (top gap, bottom gap)."""
    return GapState(top_gap=float(gap), bot_gap=psi(gap, activeness, theta))
