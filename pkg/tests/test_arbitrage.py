import math

import numpy as np
import pytest

from paamm.arbitrage import (GapState, arbitrage_trade, close_gap, contraction_bound,
                             merged_log_price, psi, psi_prime)
from paamm.curves import GeometricMeanCurve, PricePoint, Reserves
from paamm.pool import PoolState, SwapDelta

PAIRS = [(lam, th) for lam in (0.25, 0.5, 0.75, 1.0) for th in (0.3, 0.5, 0.7)]


def run_block_pipeline(theta, activeness, log_p_prev, liquidity, gap):
    """One explicit block: seed at (L, p), rebalance, arbitrage, merge."""
    curve = GeometricMeanCurve(theta)
    total = curve.reserves_from(PricePoint(liquidity, log_p_prev))
    pool = PoolState.from_total(curve, total, activeness, block=0)
    state = pool.rebalance(1)
    target = arbitrage_trade(curve, state.active, log_p_prev + gap)
    state = state.swap(SwapDelta(target.x - state.active.x, target.y - state.active.y), 1)
    return curve.log_marginal_price(state.total_reserves())


def test_arbitrage_trade_zero_gap_is_identity():
    curve = GeometricMeanCurve(0.3)
    active = Reserves(2.0, 3.0)
    moved = arbitrage_trade(curve, active, curve.log_marginal_price(active))
    assert moved.x == pytest.approx(active.x, rel=1e-14)
    assert moved.y == pytest.approx(active.y, rel=1e-14)


def test_arbitrage_trade_known_target():
    curve = GeometricMeanCurve(0.5)
    moved = arbitrage_trade(curve, Reserves(1.0, 1.0), math.log(4.0))
    assert moved == pytest.approx((0.5, 2.0), rel=1e-14)


def test_arbitrage_trade_postconditions():
    curve = GeometricMeanCurve(0.3)
    active = Reserves(2.0, 3.0)
    moved = arbitrage_trade(curve, active, 0.2)
    assert curve.invariant(moved) == pytest.approx(curve.invariant(active), rel=1e-12)
    assert curve.log_marginal_price(moved) == pytest.approx(0.2, abs=1e-12)


def test_psi_zero_fixed_point():
    for lam, th in PAIRS:
        assert psi(0.0, lam, th) == 0.0


def test_psi_vanishes_when_fully_active():
    for g in np.linspace(-10, 10, 41):
        assert abs(psi(g, 1.0, 0.5)) <= 1e-12
        assert abs(psi(g, 1.0, 0.3)) <= 1e-12


def test_psi_half_half_value():
    # at activeness 1/2 and equal weights the closed form collapses to g/2:
    # log(1 + e^(g/2)) - log(1 + e^(-g/2)) = g/2 exactly
    value = psi(0.1, 0.5, 0.5)
    assert value == pytest.approx(0.05, abs=1e-6)
    assert value == pytest.approx(0.05, rel=1e-14)


def test_psi_matches_pool_pipeline():
    rng = np.random.default_rng(17)
    for _ in range(50):
        lam = rng.uniform(0.05, 1.0)
        th = rng.uniform(0.1, 0.9)
        p_prev = rng.uniform(-2, 2)
        liq = math.exp(rng.uniform(-1, 4))
        gap = rng.uniform(-0.5, 0.5)
        p_new = run_block_pipeline(th, lam, p_prev, liq, gap)
        bot = (p_prev + gap) - p_new
        assert abs(bot - psi(gap, lam, th)) <= 1e-11
        assert abs(p_new - merged_log_price(p_prev, gap, lam, th)) <= 1e-11


def test_psi_validates_parameters():
    with pytest.raises(ValueError):
        psi(0.1, 0.0, 0.5)
    with pytest.raises(ValueError):
        psi(0.1, 0.5, 1.0)


def test_psi_prime_at_zero_is_one_minus_activeness():
    for lam, th in PAIRS:
        assert psi_prime(0.0, lam, th) == pytest.approx(1.0 - lam, abs=1e-14)


def test_psi_prime_fully_active_is_zero():
    for g in np.linspace(-5, 5, 21):
        assert abs(psi_prime(g, 1.0, 0.4)) <= 1e-14


def test_psi_prime_matches_central_difference():
    lam, th, g = 0.3, 0.4, 0.7
    h = 1e-5
    fd = (psi(g + h, lam, th) - psi(g - h, lam, th)) / (2 * h)
    assert abs(fd - psi_prime(g, lam, th)) <= 1e-8


def test_contraction_bound_values():
    assert contraction_bound(1.0, 0.5) == pytest.approx(0.5)
    assert contraction_bound(0.5, 0.3) == pytest.approx(0.85)


def test_psi_prime_within_contraction_bound_on_grid():
    grid = np.linspace(-10, 10, 100_000)
    for lam, th in PAIRS:
        rho = contraction_bound(lam, th)
        slopes = psi_prime(grid, lam, th)
        assert slopes.max() <= rho + 1e-12
        assert slopes.min() >= -1e-12


def test_psi_is_contraction_on_pairs():
    rng = np.random.default_rng(23)
    g = rng.uniform(-8, 8, 2000)
    h = rng.uniform(-8, 8, 2000)
    for lam, th in PAIRS:
        rho = contraction_bound(lam, th)
        lhs = np.abs(psi(g, lam, th) - psi(h, lam, th))
        assert np.all(lhs <= rho * np.abs(g - h) + 1e-12)


def test_psi_curvature_bound():
    grid = np.linspace(-10, 10, 50_000)
    for lam, th in PAIRS:
        remainder = np.abs(psi(grid, lam, th) - (1.0 - lam) * grid)
        assert np.all(remainder <= grid ** 2 / 8.0 + 1e-12)


def test_psi_second_derivative_bound():
    # h balances central-difference truncation (~h^2/12) against rounding
    # (~eps*|psi|/h^2) so the bound holds with only 1e-8 slack
    grid = np.linspace(-6, 6, 2000)
    h = 2.5e-4
    for lam, th in PAIRS:
        second = (psi(grid + h, lam, th) - 2 * psi(grid, lam, th) + psi(grid - h, lam, th)) / h ** 2
        bound = (th ** 2 + (1 - th) ** 2) / 4.0
        assert np.all(np.abs(second) <= bound + 1e-8)


def test_merged_log_price_trivials():
    assert merged_log_price(1.3, 0.0, 0.5, 0.4) == pytest.approx(1.3, abs=1e-15)
    assert merged_log_price(1.3, 0.25, 1.0, 0.4) == pytest.approx(1.55, rel=1e-13)


def test_merged_price_matches_explicit_reserve_mix():
    # reparametrize, mix passive and post-trade active, read the price back
    rng = np.random.default_rng(53)
    for _ in range(300):
        lam = rng.uniform(0.05, 1.0)
        th = rng.uniform(0.1, 0.9)
        p = rng.uniform(-3, 3)
        g = rng.uniform(-1, 1)
        curve = GeometricMeanCurve(th)
        stay = curve.reserves_from(PricePoint(1.0, p))
        moved = curve.reserves_from(PricePoint(1.0, p + g))
        mixed = stay.scaled(1.0 - lam) + moved.scaled(lam)
        assert abs(curve.log_marginal_price(mixed) - merged_log_price(p, g, lam, th)) <= 1e-12


def test_merged_price_consistent_with_psi():
    rng = np.random.default_rng(29)
    for _ in range(200):
        lam = rng.uniform(0.05, 1.0)
        th = rng.uniform(0.1, 0.9)
        p = rng.uniform(-3, 3)
        g = rng.uniform(-1, 1)
        assert (p + g) - merged_log_price(p, g, lam, th) == pytest.approx(
            psi(g, lam, th), abs=1e-13)


def test_close_gap_state():
    state = close_gap(0.2, 1.0, 0.5)
    assert isinstance(state, GapState)
    assert state.top_gap == 0.2
    assert abs(state.bot_gap) <= 1e-12
    for g in (-0.4, -0.01, 0.01, 0.4):
        st = close_gap(g, 0.5, 0.3)
        assert st.bot_gap == 0.0 or math.copysign(1, st.bot_gap) == math.copysign(1, g)
