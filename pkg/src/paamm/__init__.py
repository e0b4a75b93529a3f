"""Partially active automated market maker: mechanism, dynamics, and control.

A partially active pool exposes only a fixed fraction (the activeness) of
its reserves to trading each block, re-partitioning at the first interaction
of a block. This package provides the invariant-curve math, the pool state
machine, the arbitrage gap dynamics with their stationary statistics, and
the optimal-activeness control problem, plus a CLI over all of it.
"""

__version__ = "0.1.0"

from .arbitrage import (GapState, arbitrage_trade, close_gap, contraction_bound,
                        merged_log_price, psi, psi_prime)
from .control import (ControlParams, RiccatiSolution, ValueIterationResult,
                      default_action_grid, default_state_grid, feedback_lambda,
                      lambda_star, riccati_residuals, solve_riccati, stationary_loss,
                      value_iteration_oracle)
from .curves import GeometricMeanCurve, InvariantCurve, PricePoint, Reserves
from .dynamics import (BlockMetrics, BlockRecord, MomentEstimate, RateEstimate,
                       SimConfig, StationaryEstimates, gap_block_metrics, gap_chain,
                       gbm_path, iterate_gap_map, liquidity_growth_rate_estimate,
                       lvr_rate_estimate, predicted_gap_second_moment,
                       predicted_liquidity_growth_rate, predicted_lvr_rate,
                       replay_historical, simulate_path, stationary_estimates,
                       stationary_moments, step_block, tracking_error_check)
from .io import PriceDataError, read_block_records, read_price_series, write_block_records
from .pool import InvariantViolation, PoolState, SwapDelta

__all__ = [
    "__version__",
    "BlockMetrics", "BlockRecord", "ControlParams", "GapState",
    "GeometricMeanCurve", "InvariantCurve", "InvariantViolation",
    "MomentEstimate", "PoolState", "PriceDataError", "PricePoint",
    "RateEstimate", "Reserves", "RiccatiSolution", "SimConfig",
    "StationaryEstimates", "SwapDelta", "ValueIterationResult",
    "arbitrage_trade", "close_gap", "contraction_bound", "default_action_grid",
    "default_state_grid", "feedback_lambda", "gap_block_metrics", "gap_chain",
    "gbm_path", "iterate_gap_map", "lambda_star", "liquidity_growth_rate_estimate",
    "lvr_rate_estimate", "merged_log_price", "predicted_gap_second_moment",
    "predicted_liquidity_growth_rate", "predicted_lvr_rate", "psi", "psi_prime",
    "read_block_records", "read_price_series", "replay_historical",
    "riccati_residuals", "simulate_path", "solve_riccati", "stationary_estimates",
    "stationary_loss", "stationary_moments", "step_block", "tracking_error_check",
    "value_iteration_oracle", "write_block_records",
]
