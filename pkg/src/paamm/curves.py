"""Two-asset invariant-curve math: liquidity, marginal price, reparametrization.

A trading invariant phi(x, y) is strictly concave, C3 on the open positive
orthant, and 1-homogeneous. Its value is the pool's *liquidity* L, and the
marginal price of X in terms of Y is phi_x / phi_y. Every curve supports the
reparametrization R(L, p) = (x(L, p), y(L, p)), the unique reserves with
liquidity L and log marginal price p.

The shipped curve is the weighted geometric mean x^theta * y^(1-theta),
for which everything has a closed form:

    P(x, y)  = theta/(1-theta) * y/x
    x(L, p)  = L * (theta/(1-theta) * e^-p)^(1-theta)
    y(L, p)  = L * ((1-theta)/theta * e^p)^theta

Other curves can subclass ``InvariantCurve`` and supply only the invariant
and its gradient; generic bisection fallbacks cover the level-set solves.
"""

from __future__ import annotations

import abc
import math
from typing import NamedTuple


class Reserves(NamedTuple):
    """Token amounts held by a pool: risky asset x, quote asset y."""

    x: float
    y: float

    def __add__(self, other) -> "Reserves":  # elementwise, unlike plain tuples
        return Reserves(self.x + other[0], self.y + other[1])

    def scaled(self, factor: float) -> "Reserves":
        return Reserves(factor * self.x, factor * self.y)


class PricePoint(NamedTuple):
    """A point on a level set: liquidity and log marginal price."""

    liquidity: float
    log_price: float


def _require_positive(reserves: Reserves) -> None:
    if not (reserves.x > 0.0 and reserves.y > 0.0):
        raise ValueError(f"reserves must be strictly positive, got {tuple(reserves)}")


class InvariantCurve(abc.ABC):
    """A strictly concave, 1-homogeneous two-asset trading invariant.

    Subclasses must provide ``invariant`` and ``gradient``. The remaining
    operations have generic defaults built on monotone bisection along level
    sets; curves with closed forms should override them.
    """

    # bisection tolerances for the generic fallbacks
    _LEVEL_RTOL = 1e-14   # relative invariant residual in y_on_level
    _PRICE_ATOL = 1e-13   # absolute log-price residual in reserves_from

    @abc.abstractmethod
    def invariant(self, reserves: Reserves) -> float:
        """Liquidity phi(x, y). Raises ValueError off the open positive orthant."""

    @abc.abstractmethod
    def gradient(self, reserves: Reserves) -> tuple[float, float]:
        """(phi_x, phi_y) at strictly positive reserves."""

    def marginal_price(self, reserves: Reserves) -> float:
        """Spot price of X in terms of Y, phi_x / phi_y."""
        gx, gy = self.gradient(reserves)
        return gx / gy

    def log_marginal_price(self, reserves: Reserves) -> float:
        return math.log(self.marginal_price(reserves))

    def y_on_level(self, liquidity: float, x: float) -> float:
        """Solve phi(x, y) = liquidity for y. Generic: bisection in y."""
        if not (liquidity > 0.0 and x > 0.0):
            raise ValueError("liquidity and x must be positive")
        lo = hi = liquidity  # phi is increasing in y, so bracket by doubling
        while self.invariant(Reserves(x, hi)) < liquidity:
            hi *= 2.0
        while self.invariant(Reserves(x, lo)) > liquidity:
            lo *= 0.5
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            value = self.invariant(Reserves(x, mid))
            if abs(value - liquidity) <= self._LEVEL_RTOL * liquidity:
                return mid
            if value < liquidity:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 4.0 * math.ulp(hi):
                break
        return 0.5 * (lo + hi)

    def reserves_from(self, point: PricePoint) -> Reserves:
        """Reserves R(L, p) with the given liquidity and log marginal price.

        Generic: solve on the unit level set (1-homogeneity) by bisection on
        x, using that the marginal price decreases strictly in x along a
        level set, then scale by L.
        """
        liquidity, log_price = point
        if not liquidity > 0.0:
            raise ValueError("liquidity must be positive")
        lo = hi = 1.0
        while self._unit_log_price(hi) > log_price:
            hi *= 2.0
        while self._unit_log_price(lo) < log_price:
            lo *= 0.5
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            p_mid = self._unit_log_price(mid)
            if abs(p_mid - log_price) <= self._PRICE_ATOL:
                break
            if p_mid > log_price:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 4.0 * math.ulp(hi):
                break
        x = 0.5 * (lo + hi)
        return Reserves(liquidity * x, liquidity * self.y_on_level(1.0, x))

    def _unit_log_price(self, x: float) -> float:
        return self.log_marginal_price(Reserves(x, self.y_on_level(1.0, x)))

    def pool_value(self, point: PricePoint, true_price: float) -> float:
        """Mark-to-market value S*x(L, p) + y(L, p) at external price S."""
        if not true_price > 0.0:
            raise ValueError("true price must be positive")
        x, y = self.reserves_from(point)
        return true_price * x + y

    def target_weight(self, log_price: float) -> float:
        """Risky-asset value share of a pool perfectly aligned to the price."""
        x, y = self.reserves_from(PricePoint(1.0, log_price))
        value_x = math.exp(log_price) * x
        return value_x / (value_x + y)


class GeometricMeanCurve(InvariantCurve):
    """Weighted geometric-mean invariant x^theta * y^(1-theta), theta in (0, 1).

    Powers are evaluated in the log domain so extreme reserve ratios do not
    lose precision. Boundary reserves (x = 0 or y = 0) are rejected: the
    marginal price diverges there.
    """

    def __init__(self, theta: float):
        theta = float(theta)
        if not 0.0 < theta < 1.0:
            raise ValueError(f"theta must be in (0, 1), got {theta}")
        self.theta = theta

    def __repr__(self) -> str:
        return f"GeometricMeanCurve(theta={self.theta!r})"

    def invariant(self, reserves: Reserves) -> float:
        _require_positive(reserves)
        th = self.theta
        return math.exp(th * math.log(reserves.x) + (1.0 - th) * math.log(reserves.y))

    def gradient(self, reserves: Reserves) -> tuple[float, float]:
        value = self.invariant(reserves)
        th = self.theta
        return th * value / reserves.x, (1.0 - th) * value / reserves.y

    def marginal_price(self, reserves: Reserves) -> float:
        _require_positive(reserves)
        th = self.theta
        return th / (1.0 - th) * reserves.y / reserves.x

    def log_marginal_price(self, reserves: Reserves) -> float:
        _require_positive(reserves)
        th = self.theta
        return math.log(th / (1.0 - th)) + math.log(reserves.y) - math.log(reserves.x)

    def y_on_level(self, liquidity: float, x: float) -> float:
        if not (liquidity > 0.0 and x > 0.0):
            raise ValueError("liquidity and x must be positive")
        th = self.theta
        return math.exp((math.log(liquidity) - th * math.log(x)) / (1.0 - th))

    def reserves_from(self, point: PricePoint) -> Reserves:
        liquidity, log_price = point
        if not liquidity > 0.0:
            raise ValueError("liquidity must be positive")
        th = self.theta
        ratio = math.log(th / (1.0 - th))
        x = liquidity * math.exp((1.0 - th) * (ratio - log_price))
        y = liquidity * math.exp(th * (log_price - ratio))
        return Reserves(x, y)

    def target_weight(self, log_price: float) -> float:
        return self.theta

    def lvr_rate(self, pool_value: float, sigma: float) -> float:
        """Instantaneous loss-versus-rebalancing rate of a fully active pool.

        For the geometric-mean curve this is (sigma^2 / 2) * theta * (1-theta) * V.
        """
        if pool_value < 0.0:
            raise ValueError("pool value must be nonnegative")
        if sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        return 0.5 * sigma * sigma * self.theta * (1.0 - self.theta) * pool_value
