"""Partially active pool state machine.

Total reserves are split into an active part, the only part trades execute
against, and an idle passive part. At the first interaction of an eligible
block the split is refreshed so the active side is again an ``activeness``
fraction of the total. Swaps must keep the invariant of the active reserves
from decreasing.

States are immutable values; every operation returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

from .curves import InvariantCurve, Reserves

# Relative slack on the invariant check so equality trades computed in closed
# form are not rejected by the last-ulp rounding of phi.
_INVARIANT_RTOL = 1e-12


class InvariantViolation(Exception):
    """A proposed trade would decrease the pool invariant."""


class SwapDelta(NamedTuple):
    """Signed reserve changes of a trade against the active side."""

    dx: float
    dy: float


@dataclass(frozen=True)
class PoolState:
    curve: InvariantCurve
    active: Reserves
    passive: Reserves
    activeness: float
    last_rebalance_block: int = 0
    rebalance_period: int = 1

    def __post_init__(self):
        if not 0.0 < self.activeness <= 1.0:
            raise ValueError(f"activeness must be in (0, 1], got {self.activeness}")
        if not (self.active.x > 0.0 and self.active.y > 0.0):
            raise ValueError("active reserves must be strictly positive")
        if self.passive.x < 0.0 or self.passive.y < 0.0:
            raise ValueError("passive reserves must be nonnegative")
        if self.last_rebalance_block < 0:
            raise ValueError("block height must be nonnegative")
        if self.rebalance_period < 1:
            raise ValueError("rebalance period must be a positive integer")

    @classmethod
    def from_total(cls, curve: InvariantCurve, total: Reserves, activeness: float,
                   block: int = 0, rebalance_period: int = 1) -> "PoolState":
        """Seed a pool by partitioning fresh total reserves at ``block``."""
        return cls(
            curve=curve,
            active=total.scaled(activeness),
            passive=total.scaled(1.0 - activeness),
            activeness=activeness,
            last_rebalance_block=block,
            rebalance_period=rebalance_period,
        )

    def total_reserves(self) -> Reserves:
        return self.active + self.passive

    def due_for_rebalance(self, block: int) -> bool:
        return block - self.last_rebalance_block >= self.rebalance_period

    def rebalance(self, block: int) -> "PoolState":
        """Refresh the active/passive split if the block is eligible.

        The split only re-partitions: total reserves are unchanged. Calling
        again at the same block is a no-op.
        """
        if block < self.last_rebalance_block:
            raise ValueError("block height cannot decrease")
        if not self.due_for_rebalance(block):
            return self
        total = self.total_reserves()
        return replace(
            self,
            active=total.scaled(self.activeness),
            passive=total.scaled(1.0 - self.activeness),
            last_rebalance_block=block,
        )

    def swap(self, delta: SwapDelta, block: int) -> "PoolState":
        """Apply a trade to the active reserves after the lazy rebalance.

        Accepts any trade that keeps the active-side invariant from
        decreasing; the passive side is untouched.
        """
        state = self.rebalance(block)
        new_active = state.active + delta
        if not (new_active.x > 0.0 and new_active.y > 0.0):
            raise ValueError(f"trade would leave non-positive reserves {tuple(new_active)}")
        before = state.curve.invariant(state.active)
        after = state.curve.invariant(new_active)
        if after < before * (1.0 - _INVARIANT_RTOL):
            raise InvariantViolation(
                f"invariant would drop from {before!r} to {after!r}"
            )
        return replace(state, active=new_active)

    def swap_exact_in(self, dx: float, block: int) -> float:
        """Output leg dy for an exact input dx, quoted at invariant equality.

        The quote is computed on the post-rebalance active reserves, mirroring
        what a swap at ``block`` would trade against. For dx > 0 the returned
        dy is <= 0.
        """
        state = self.rebalance(block)
        new_x = state.active.x + dx
        if not new_x > 0.0:
            raise ValueError("input would drain the x reserve")
        liquidity = state.curve.invariant(state.active)
        new_y = state.curve.y_on_level(liquidity, new_x)
        if not new_y > 0.0:
            raise ValueError("no positive output reserve remains")
        return new_y - state.active.y
