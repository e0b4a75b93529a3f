"""Command-line front end.

Subcommands: simulate, moments, frontier, optimal-lambda, replay. Every run
writes its data files plus a ``manifest.json`` recording the full parameter
set, inputs, and outputs; re-running the same command reproduces the data
files byte for byte.

Units convention: mu, sigma, and rho are quoted per year (sigma annualized),
and --dt is the block time in years. The default dt is a 12-second block,
12/31536000 years.

Exit codes: 0 success, 2 usage error, 3 input data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .control import (ControlParams, default_action_grid, default_state_grid,
                      feedback_lambda, lambda_star, solve_riccati, stationary_loss,
                      value_iteration_oracle)
from .curves import GeometricMeanCurve, Reserves
from .dynamics import (SimConfig, predicted_gap_second_moment, predicted_lvr_rate,
                       replay_historical, simulate_path, stationary_estimates)
from .io import (format_float, read_price_series, write_block_records, write_json,
                 PriceDataError)
from .pool import PoolState

SECONDS_PER_YEAR = 31_536_000
DEFAULT_DT = 12 / SECONDS_PER_YEAR


def _activeness_list(text: str) -> list[float]:
    values = []
    for token in text.split(","):
        value = float(token)
        if not 0.0 < value <= 1.0:
            raise argparse.ArgumentTypeError(
                f"activeness must be in (0, 1], got {token.strip()}"
            )
        values.append(value)
    return values


def _theta(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"theta must be in (0, 1), got {text}")
    return value


def _nonnegative(text: str) -> float:
    value = float(text)
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def _positive(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _nonnegative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be a nonnegative integer, got {text}")
    return value


def _add_market_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--theta", type=_theta, default=0.5,
                        help="risky-asset weight of the pool, in (0, 1) (default 0.5)")
    parser.add_argument("--lambda", dest="lambdas", type=_activeness_list, default=[1.0],
                        help="activeness in (0, 1], scalar or comma list (default 1)")
    parser.add_argument("--mu", type=float, default=0.0,
                        help="log-price drift per year (default 0)")
    parser.add_argument("--sigma", type=_nonnegative, default=0.5,
                        help="annualized log-price volatility (default 0.5)")
    parser.add_argument("--dt", type=_positive, default=DEFAULT_DT,
                        help="block time in years (default 12 seconds)")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    parser.add_argument("--period", type=_positive_int, default=1,
                        help="blocks between eligible rebalances (default 1)")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory (default ./out)")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="format of the summary document (command-specific default)")
    parser.add_argument("--plot", action="store_true",
                        help="also render figures next to the data files")


def _add_control_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma", type=_nonnegative, required=True,
                        help="weight of LVR relative to tracking error, >= 0")
    parser.add_argument("--rho", type=_nonnegative, default=0.05,
                        help="discount rate per year (default 0.05)")
    parser.add_argument("--lambda-lower", type=_theta, default=0.05,
                        help="activeness floor in (0, 1) (default 0.05)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paamm",
        description="Partially active AMM laboratory: simulation, stationary "
                    "statistics, and optimal-activeness control.",
    )
    parser.add_argument("--version", action="version", version=f"paamm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="block-by-block pool paths under a GBM price")
    _add_market_flags(p)
    p.add_argument("--blocks", type=_positive_int, default=10_000,
                   help="path length in blocks (default 10000)")
    p.add_argument("--x0", type=_positive, default=1000.0,
                   help="initial risky reserve (default 1000)")
    p.add_argument("--price0", type=_positive, default=1.0,
                   help="initial true price; the pool is seeded on it (default 1)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="stationary gap moments against the closed form")
    _add_market_flags(p)
    p.add_argument("--blocks", type=_positive_int, default=110_000,
                   help="simulated blocks including burn-in (default 110000)")
    p.add_argument("--burn-in", type=_nonnegative_int, default=10_000,
                   help="blocks discarded before estimation (default 10000)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("frontier", help="gap variance vs LVR rate across activeness")
    _add_market_flags(p)
    p.set_defaults(lambdas=[0.25, 0.5, 0.75, 1.0])
    p.add_argument("--blocks", type=_positive_int, default=110_000,
                   help="simulated blocks including burn-in (default 110000)")
    p.add_argument("--burn-in", type=_nonnegative_int, default=10_000,
                   help="blocks discarded before estimation (default 10000)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("optimal-lambda", help="value function, feedback policy, and "
                                              "small-dt optimal activeness")
    _add_control_flags(p)
    p.add_argument("--mu", type=float, default=0.0, help="log-price drift per year (default 0)")
    p.add_argument("--sigma", type=_nonnegative, default=0.5,
                   help="annualized log-price volatility (default 0.5)")
    p.add_argument("--dt", type=_positive, default=DEFAULT_DT,
                   help="block time in years (default 12 seconds)")
    p.add_argument("--oracle", action="store_true",
                   help="also run the grid value-iteration cross-check")
    _add_output_flags(p)
    p.set_defaults(func=cmd_optimal_lambda)

    p = sub.add_parser("replay", help="run the pipeline over a historical price CSV")
    p.add_argument("prices", type=Path, help="CSV file of 'timestamp,price' rows")
    _add_market_flags(p)
    p.add_argument("--x0", type=_positive, default=1000.0,
                   help="initial risky reserve (default 1000)")
    _add_output_flags(p)
    p.set_defaults(func=cmd_replay)

    return parser


def _ensure_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed_pool(curve: GeometricMeanCurve, x0: float, price0: float,
               activeness: float, period: int) -> PoolState:
    y0 = price0 * x0 * (1.0 - curve.theta) / curve.theta
    return PoolState.from_total(curve, Reserves(x0, y0), activeness,
                                block=0, rebalance_period=period)


def _write_manifest(out: Path, command: str, parameters: dict, inputs: dict,
                    outputs: dict) -> None:
    write_json(out / "manifest.json", {
        "tool": "paamm",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "inputs": inputs,
        "outputs": outputs,
    })


def _write_rows_csv(path: Path, columns: tuple[str, ...], rows: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(",".join(
                format_float(row[c]) if isinstance(row[c], float) else str(row[c])
                for c in columns) + "\n")


def _series_summary(activeness: float, records, csv_name: str) -> dict:
    gaps = np.array([r.top_gap for r in records])
    return {
        "activeness": activeness,
        "blocks": len(records),
        "cumulative_lvr": float(np.sum([r.lvr for r in records])),
        "cumulative_norm_lvr": float(np.sum([r.norm_lvr for r in records])),
        "final_log_liquidity": records[-1].log_liquidity,
        "gap_variance": float(gaps.var()),
        "csv": csv_name,
    }


def _write_series_outputs(args, out: Path, command: str, series: dict, rows: list[dict],
                          common: dict, parameters: dict, inputs: dict) -> None:
    outputs = {row["csv"].removesuffix(".csv"): row["csv"] for row in rows}
    summary_format = args.format or "json"
    if summary_format == "json":
        summary_name = "summary.json"
        write_json(out / summary_name, dict(common, per_lambda=rows))
    else:
        summary_name = "summary.csv"
        columns = ("activeness", "blocks", "cumulative_lvr", "cumulative_norm_lvr",
                   "final_log_liquidity", "gap_variance", "csv")
        _write_rows_csv(out / summary_name, columns, rows)
    outputs["summary"] = summary_name
    if args.plot:
        from .plots import save_block_series_figure
        figure_name = f"{command}.png"
        save_block_series_figure(series, out / figure_name)
        outputs["figure"] = figure_name
    _write_manifest(out, command, parameters, inputs, outputs)
    for row in rows:
        print(f"activeness {row['activeness']:g}: cumulative LVR {row['cumulative_lvr']:.6g}, "
              f"gap variance {row['gap_variance']:.6g}")
    print(f"wrote {len(outputs)} files to {out}")


def cmd_simulate(args) -> int:
    out = _ensure_out(args)
    curve = GeometricMeanCurve(args.theta)
    config = SimConfig(mu=args.mu, sigma=args.sigma, dt=args.dt,
                       n_blocks=args.blocks, burn_in=0, seed=args.seed)
    series, rows = {}, []
    for lam in args.lambdas:
        pool = _seed_pool(curve, args.x0, args.price0, lam, args.period)
        records = simulate_path(config, pool)
        token = format(lam, "g")
        csv_name = f"blocks_lambda{token}.csv"
        write_block_records(out / csv_name, records)
        series[token] = records
        rows.append(_series_summary(lam, records, csv_name))
    common = {"theta": args.theta, "mu": args.mu, "sigma": args.sigma, "dt": args.dt,
              "blocks": args.blocks, "seed": args.seed, "period": args.period}
    parameters = dict(common, x0=args.x0, price0=args.price0, out=str(args.out),
                      activeness=args.lambdas, format=args.format, plot=args.plot)
    _write_series_outputs(args, out, "simulate", series, rows, common, parameters, {})
    return 0


def cmd_replay(args) -> int:
    out = _ensure_out(args)
    prices = read_price_series(args.prices)
    curve = GeometricMeanCurve(args.theta)
    price0 = prices[0][1]
    series, rows = {}, []
    for lam in args.lambdas:
        pool = _seed_pool(curve, args.x0, price0, lam, args.period)
        records = replay_historical(prices, pool)
        token = format(lam, "g")
        csv_name = f"blocks_lambda{token}.csv"
        write_block_records(out / csv_name, records)
        series[token] = records
        rows.append(_series_summary(lam, records, csv_name))
    common = {"theta": args.theta, "blocks": len(prices), "period": args.period,
              "price0": price0}
    parameters = {"theta": args.theta, "activeness": args.lambdas, "x0": args.x0,
                  "period": args.period, "out": str(args.out), "format": args.format,
                  "plot": args.plot}
    inputs = {"prices": str(args.prices)}
    _write_series_outputs(args, out, "replay", series, rows, common, parameters, inputs)
    return 0


def _stationary_rows(args) -> list[dict]:
    config = SimConfig(mu=args.mu, sigma=args.sigma, dt=args.dt,
                       n_blocks=args.blocks, burn_in=args.burn_in, seed=args.seed)
    rows = []
    for lam in args.lambdas:
        est = stationary_estimates(lam, args.theta, config)
        closed_m2 = predicted_gap_second_moment(lam, args.sigma, args.dt)
        rows.append({
            "activeness": lam,
            "n_samples": est.moments.n_samples,
            "mean_gap": est.moments.mean_gap,
            "second_moment_gap": est.moments.second_moment_gap,
            "second_moment_std_error": est.moments.std_error,
            "closed_form_second_moment": closed_m2,
            "second_moment_ratio": est.moments.second_moment_gap / closed_m2,
            "gap_variance_estimate": est.moments.second_moment_gap - est.moments.mean_gap ** 2,
            "gap_variance_std_error": est.moments.std_error,
            "gap_variance_closed_form": closed_m2,
            "lvr_rate_estimate": est.lvr_rate.value,
            "lvr_rate_std_error": est.lvr_rate.std_error,
            "lvr_rate_closed_form": predicted_lvr_rate(lam, args.theta, args.sigma),
        })
    return rows


def cmd_moments(args) -> int:
    out = _ensure_out(args)
    rows = _stationary_rows(args)
    columns = ("activeness", "n_samples", "mean_gap", "second_moment_gap",
               "second_moment_std_error", "closed_form_second_moment",
               "second_moment_ratio")
    results = [{c: row[c] for c in columns} for row in rows]
    common = {"theta": args.theta, "mu": args.mu, "sigma": args.sigma, "dt": args.dt,
              "blocks": args.blocks, "burn_in": args.burn_in, "seed": args.seed}
    if (args.format or "json") == "json":
        name = "moments.json"
        write_json(out / name, dict(common, results=results))
    else:
        name = "moments.csv"
        _write_rows_csv(out / name, columns, results)
    parameters = dict(common, activeness=args.lambdas, period=args.period,
                      out=str(args.out), format=args.format, plot=args.plot)
    _write_manifest(out, "moments", parameters, {}, {"results": name})
    for row in results:
        print(f"activeness {row['activeness']:g}: E[g^2] {row['second_moment_gap']:.6g} "
              f"vs closed form {row['closed_form_second_moment']:.6g} "
              f"(ratio {row['second_moment_ratio']:.4f})")
    return 0


def cmd_frontier(args) -> int:
    out = _ensure_out(args)
    rows = _stationary_rows(args)
    columns = ("activeness", "gap_variance_estimate", "gap_variance_std_error",
               "gap_variance_closed_form", "lvr_rate_estimate", "lvr_rate_std_error",
               "lvr_rate_closed_form")
    results = [{c: row[c] for c in columns} for row in rows]
    if (args.format or "csv") == "csv":
        name = "frontier.csv"
        _write_rows_csv(out / name, columns, results)
    else:
        name = "frontier.json"
        write_json(out / name, {"results": results})
    outputs = {"frontier": name}
    if args.plot:
        from .plots import save_frontier_figure
        save_frontier_figure(results, out / "frontier.png")
        outputs["figure"] = "frontier.png"
    parameters = {"theta": args.theta, "activeness": args.lambdas, "mu": args.mu,
                  "sigma": args.sigma, "dt": args.dt, "blocks": args.blocks,
                  "burn_in": args.burn_in, "seed": args.seed, "period": args.period,
                  "out": str(args.out), "format": args.format, "plot": args.plot}
    _write_manifest(out, "frontier", parameters, {}, outputs)
    for row in results:
        print(f"activeness {row['activeness']:g}: variance {row['gap_variance_estimate']:.6g}, "
              f"LVR rate {row['lvr_rate_estimate']:.6g}")
    return 0


def cmd_optimal_lambda(args) -> int:
    out = _ensure_out(args)
    params = ControlParams(gamma=args.gamma, rho_disc=args.rho, dt=args.dt,
                           mu=args.mu, sigma=args.sigma, lambda_lower=args.lambda_lower)
    solution = solve_riccati(params)
    optimum = lambda_star(args.gamma)
    payload = {
        "gamma": args.gamma,
        "rho": args.rho,
        "dt": args.dt,
        "mu": args.mu,
        "sigma": args.sigma,
        "lambda_lower": args.lambda_lower,
        "lambda_star": optimum,
        "riccati": {"v2": solution.v2, "v1": solution.v1, "v0": solution.v0,
                    "beta": solution.beta},
        "feedback_constant": feedback_lambda(0.0, solution, params),
    }
    outputs = {}
    if args.oracle:
        result = value_iteration_oracle(params)
        reference = np.array([feedback_lambda(g, solution, params)
                              for g in result.state_grid])
        deviation = float(np.max(np.abs(result.policy - reference)))
        policy_name = "oracle_policy.csv"
        _write_rows_csv(out / policy_name,
                        ("gap", "value", "oracle_lambda", "feedback_lambda"),
                        [{"gap": float(g), "value": float(v), "oracle_lambda": float(p),
                          "feedback_lambda": float(r)}
                         for g, v, p, r in zip(result.state_grid, result.values,
                                               result.policy, reference)])
        payload["oracle"] = {
            "sweeps": result.sweeps,
            "action_step": result.action_step,
            "max_policy_deviation": deviation,
            "max_policy_deviation_steps": deviation / result.action_step,
            "policy_csv": policy_name,
        }
        outputs["oracle_policy"] = policy_name
    if (args.format or "json") == "json":
        name = "optimal_lambda.json"
        write_json(out / name, payload)
    else:
        name = "optimal_lambda.csv"
        columns = ("gamma", "lambda_star", "v2", "v1", "v0", "beta", "feedback_constant")
        _write_rows_csv(out / name, columns, [{
            "gamma": args.gamma, "lambda_star": optimum, "v2": solution.v2,
            "v1": solution.v1, "v0": solution.v0, "beta": solution.beta,
            "feedback_constant": payload["feedback_constant"]}])
    outputs["optimal_lambda"] = name
    if args.plot:
        from .plots import save_control_figure
        lam_grid = np.linspace(0.01, 1.0, 200)
        losses = np.array([stationary_loss(l, args.gamma) for l in lam_grid])
        gammas = np.linspace(0.0, 10.0, 201)
        optima = np.array([lambda_star(g) for g in gammas])
        save_control_figure(args.gamma, lam_grid, losses, optimum, gammas, optima,
                            out / "control.png")
        outputs["figure"] = "control.png"
    parameters = {"gamma": args.gamma, "rho": args.rho, "dt": args.dt, "mu": args.mu,
                  "sigma": args.sigma, "lambda_lower": args.lambda_lower,
                  "oracle": args.oracle, "out": str(args.out), "format": args.format,
                  "plot": args.plot}
    _write_manifest(out, "optimal-lambda", parameters, {}, outputs)
    print(f"gamma {args.gamma:g}: optimal activeness {optimum!r} "
          f"(v2 {solution.v2:.6g}, feedback constant {payload['feedback_constant']:.6g})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PriceDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
