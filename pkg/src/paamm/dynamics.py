"""Block-level simulation and stationary statistics.

Each block runs the same pipeline: lazy rebalance, arbitrage on the active
reserves, merge, record metrics. Under a geometric Brownian true price the
top-of-block gap follows the scalar recursion

    g_{n+1} = psi(g_n) + eps_{n+1},   eps ~ N(mu*dt, sigma^2*dt) i.i.d.

which is a contractive iterated random function with a unique stationary
law. All per-block quantities of a geometric-mean pool (normalized LVR,
log-liquidity growth, post-trade weight, tracking error) are scale-free
functions of the gap alone, so long-run rates are estimated by running the
cheap gap chain and mapping gaps through :func:`gap_block_metrics`; the
equivalence with the full reserve pipeline is covered by tests.

Those identities assume the once-per-block rebalance. With a longer
rebalance period the pipeline still applies (and block LVR stays
nonnegative), but the gap recursion and the monotone per-block liquidity
growth hold only between refreshes, not block by block.

Closed-form small-dt predictions, kept next to their estimators:

    E[g^2]                ~ sigma^2*dt / (lam*(2-lam))
    E[norm LVR]/dt        -> theta*(1-theta)*sigma^2 / (2*(2-lam))
    E[dlog L]/dt          -> theta*(1-theta)*sigma^2/2 * (1-lam)/(2-lam)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .arbitrage import _check_params, arbitrage_trade
from .curves import Reserves
from .pool import PoolState, SwapDelta


@dataclass(frozen=True)
class SimConfig:
    """Price-process and horizon parameters.

    mu and sigma are per unit time and per square-root unit time; dt is the
    block time in the same units. burn_in blocks are discarded before moment
    estimation. Paths are deterministic functions of the seed.
    """

    mu: float
    sigma: float
    dt: float
    n_blocks: int
    burn_in: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be at least 1")
        if not 0 <= self.burn_in < self.n_blocks:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_blocks")

    def innovations(self) -> np.ndarray:
        """The n_blocks i.i.d. log-price increments for this seed."""
        rng = np.random.default_rng(self.seed)
        draws = rng.standard_normal(self.n_blocks)
        return self.mu * self.dt + self.sigma * math.sqrt(self.dt) * draws


@dataclass(frozen=True)
class BlockRecord:
    """Per-block metrics measured after the arbitrage trade and merge."""

    block: int
    log_true_price: float
    top_gap: float
    bot_gap: float
    log_liquidity: float
    lvr: float
    norm_lvr: float
    risky_weight: float
    tracking_error: float


@dataclass(frozen=True)
class MomentEstimate:
    mean_gap: float
    second_moment_gap: float
    std_error: float  # batch-means standard error of the second moment
    n_samples: int


@dataclass(frozen=True)
class RateEstimate:
    value: float
    std_error: float
    n_samples: int


@dataclass(frozen=True)
class StationaryEstimates:
    """Everything one stationary chain buys: moments plus per-time rates."""

    activeness: float
    theta: float
    moments: MomentEstimate
    lvr_rate: RateEstimate
    liquidity_growth_rate: RateEstimate


class BlockMetrics(NamedTuple):
    """Vectorized per-block outcomes as functions of the top gap."""

    bot_gap: np.ndarray
    log_liquidity_growth: np.ndarray
    norm_lvr: np.ndarray
    risky_weight: np.ndarray
    tracking_error: np.ndarray


def gbm_path(config: SimConfig, s0: float = 0.0) -> np.ndarray:
    """Log-price path of length n_blocks + 1 starting at s0."""
    out = np.empty(config.n_blocks + 1)
    out[0] = s0
    np.cumsum(config.innovations(), out=out[1:])
    out[1:] += s0
    return out


def iterate_gap_map(g0: float, innovations, activeness: float, theta: float) -> np.ndarray:
    """Iterate g_{k+1} = psi(g_k) + innovations[k]; returns the iterates after g0."""
    _check_params(activeness, theta)
    eps = np.asarray(innovations, dtype=float)
    if activeness == 1.0:
        return eps.copy()  # psi vanishes identically: the gap is the innovation
    lam = float(activeness)
    down_rate = 1.0 - float(theta)
    up_rate = float(theta)
    expm1 = math.expm1
    log1p = math.log1p
    g = float(g0)
    out = []
    push = out.append
    for e in eps.tolist():
        g = e + g - log1p(lam * expm1(up_rate * g)) + log1p(lam * expm1(-down_rate * g))
        push(g)
    return np.asarray(out)


def gap_chain(activeness: float, theta: float, config: SimConfig, g0: float = 0.0) -> np.ndarray:
    """Simulate the stationary gap chain; returns the post-burn-in gaps."""
    gaps = iterate_gap_map(g0, config.innovations(), activeness, theta)
    return gaps[config.burn_in:]


def gap_block_metrics(gap, activeness: float, theta: float) -> BlockMetrics:
    """Exact one-block outcomes for a unit pool (L = 1, pool log price 0).

    By 1-homogeneity of the invariant these normalized quantities are what
    any geometric-mean pool realizes at the same gap, whatever its size or
    price level. ``gap`` may be a scalar or an array.
    """
    _check_params(activeness, theta)
    g = np.atleast_1d(np.asarray(gap, dtype=float))
    lam = activeness
    mix_x = 1.0 + lam * np.expm1(-(1.0 - theta) * g)  # new_x / x(1, 0)
    mix_y = 1.0 + lam * np.expm1(theta * g)           # new_y / y(1, 0)
    log_mix_x = np.log1p(lam * np.expm1(-(1.0 - theta) * g))
    log_mix_y = np.log1p(lam * np.expm1(theta * g))
    dlog_liq = theta * log_mix_x + (1.0 - theta) * log_mix_y
    bot = g - (log_mix_y - log_mix_x)
    x0 = (theta / (1.0 - theta)) ** (1.0 - theta)
    y0 = ((1.0 - theta) / theta) ** theta
    s = np.exp(g)
    value_before = s * x0 + y0
    value_x_after = s * x0 * mix_x
    value_after = value_x_after + y0 * mix_y
    weight = value_x_after / value_after
    return BlockMetrics(
        bot_gap=bot,
        log_liquidity_growth=dlog_liq,
        norm_lvr=(value_before - value_after) / (x0 + y0),
        risky_weight=weight,
        tracking_error=(weight - theta) ** 2,
    )


def step_block(pool: PoolState, log_true_price: float, block: int) -> tuple[PoolState, BlockRecord]:
    """One block of the pipeline: rebalance, arbitrage via swap, merge, measure."""
    curve = pool.curve
    total = pool.total_reserves()
    log_p_prev = curve.log_marginal_price(total)
    true_price = math.exp(log_true_price)
    value_before = true_price * total.x + total.y
    value_own_prev = math.exp(log_p_prev) * total.x + total.y

    state = pool.rebalance(block)
    target = arbitrage_trade(curve, state.active, log_true_price)
    delta = SwapDelta(target.x - state.active.x, target.y - state.active.y)
    state = state.swap(delta, block)

    new_total = state.total_reserves()
    log_p = curve.log_marginal_price(new_total)
    value_after = true_price * new_total.x + new_total.y
    weight = true_price * new_total.x / value_after
    target_w = curve.target_weight(log_true_price)
    record = BlockRecord(
        block=block,
        log_true_price=log_true_price,
        top_gap=log_true_price - log_p_prev,
        bot_gap=log_true_price - log_p,
        log_liquidity=math.log(curve.invariant(new_total)),
        lvr=value_before - value_after,
        norm_lvr=(value_before - value_after) / value_own_prev,
        risky_weight=weight,
        tracking_error=(weight - target_w) ** 2,
    )
    return state, record


def simulate_path(config: SimConfig, pool: PoolState) -> list[BlockRecord]:
    """Drive the block pipeline along a seeded GBM path started at the pool price."""
    s0 = pool.curve.log_marginal_price(pool.total_reserves())
    path = gbm_path(config, s0)
    records = []
    state = pool
    first_block = pool.last_rebalance_block + 1
    for offset, s in enumerate(path[1:]):
        state, record = step_block(state, float(s), first_block + offset)
        records.append(record)
    return records


def replay_historical(prices: Sequence[tuple[float, float]], pool: PoolState) -> list[BlockRecord]:
    """Run the pipeline over observed (timestamp, price) rows, one block each."""
    state = pool
    records = []
    last_ts = None
    first_block = pool.last_rebalance_block + 1
    for i, (ts, price) in enumerate(prices):
        if not price > 0.0:
            raise ValueError(f"price entry {i} must be positive, got {price}")
        if last_ts is not None and ts <= last_ts:
            raise ValueError(f"timestamps must be strictly increasing at entry {i}")
        last_ts = ts
        state, record = step_block(state, math.log(price), first_block + i)
        records.append(record)
    return records


def _batch_standard_error(values: np.ndarray, n_batches: int = 200) -> float:
    """Batch-means standard error of the mean, robust to autocorrelation."""
    n_batches = min(n_batches, max(values.size // 2, 1))
    if n_batches < 2:
        return float("nan")
    usable = values.size - values.size % n_batches
    means = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def stationary_estimates(activeness: float, theta: float, config: SimConfig) -> StationaryEstimates:
    """Moments and per-time rates from one post-burn-in stationary chain."""
    gaps = gap_chain(activeness, theta, config)
    metrics = gap_block_metrics(gaps, activeness, theta)
    sq = gaps * gaps
    moments = MomentEstimate(
        mean_gap=float(gaps.mean()),
        second_moment_gap=float(sq.mean()),
        std_error=_batch_standard_error(sq),
        n_samples=gaps.size,
    )
    lvr = RateEstimate(
        value=float(metrics.norm_lvr.mean()) / config.dt,
        std_error=_batch_standard_error(metrics.norm_lvr) / config.dt,
        n_samples=gaps.size,
    )
    growth = RateEstimate(
        value=float(metrics.log_liquidity_growth.mean()) / config.dt,
        std_error=_batch_standard_error(metrics.log_liquidity_growth) / config.dt,
        n_samples=gaps.size,
    )
    return StationaryEstimates(
        activeness=activeness,
        theta=theta,
        moments=moments,
        lvr_rate=lvr,
        liquidity_growth_rate=growth,
    )


def stationary_moments(activeness: float, theta: float, config: SimConfig) -> MomentEstimate:
    """Monte Carlo mean and second moment of the stationary gap."""
    return stationary_estimates(activeness, theta, config).moments


def lvr_rate_estimate(activeness: float, theta: float, config: SimConfig) -> RateEstimate:
    """Estimated E[normalized LVR] / dt on a stationary path."""
    return stationary_estimates(activeness, theta, config).lvr_rate


def liquidity_growth_rate_estimate(activeness: float, theta: float, config: SimConfig) -> RateEstimate:
    """Estimated E[log-liquidity growth] / dt on a stationary path."""
    return stationary_estimates(activeness, theta, config).liquidity_growth_rate


def predicted_gap_second_moment(activeness: float, sigma: float, dt: float) -> float:
    return sigma * sigma * dt / (activeness * (2.0 - activeness))


def predicted_lvr_rate(activeness: float, theta: float, sigma: float) -> float:
    return theta * (1.0 - theta) * sigma * sigma / (2.0 * (2.0 - activeness))


def predicted_liquidity_growth_rate(activeness: float, theta: float, sigma: float) -> float:
    return 0.5 * theta * (1.0 - theta) * sigma * sigma * (1.0 - activeness) / (2.0 - activeness)


def tracking_error_check(activeness: float, theta: float, gap: float) -> tuple[float, float]:
    """(exact, quadratic-expansion) tracking error at one top-of-block gap.

    The exact value runs the full reserve pipeline on a unit pool; the
    expansion is (theta*(1-theta)*(1-lam)*gap)^2, accurate to cubic order.
    """
    from .curves import GeometricMeanCurve, PricePoint

    curve = GeometricMeanCurve(theta)
    total = curve.reserves_from(PricePoint(1.0, 0.0))
    pool = PoolState.from_total(curve, total, activeness, block=0)
    _, record = step_block(pool, float(gap), 1)
    expansion = (theta * (1.0 - theta) * (1.0 - activeness) * gap) ** 2
    return record.tracking_error, expansion
