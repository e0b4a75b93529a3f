"""Figure rendering for the report path of the CLI.

Figures are companions to the delimited outputs, never a replacement: every
panel is drawn from the same records the CSV/JSON files contain.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import BlockRecord


def save_block_series_figure(series: dict[str, list[BlockRecord]], path: Path | str) -> None:
    """Cumulative LVR and top-of-block gap over blocks, one line per activeness."""
    fig, (ax_lvr, ax_gap) = plt.subplots(1, 2, figsize=(10, 4))
    for label, records in series.items():
        blocks = [r.block for r in records]
        ax_lvr.plot(blocks, np.cumsum([r.lvr for r in records]), label=f"activeness {label}")
        ax_gap.plot(blocks, [r.top_gap for r in records], label=f"activeness {label}")
    ax_lvr.set_xlabel("block")
    ax_lvr.set_ylabel("cumulative LVR (quote units)")
    ax_gap.set_xlabel("block")
    ax_gap.set_ylabel("top-of-block gap (log price)")
    ax_lvr.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_frontier_figure(rows: list[dict], path: Path | str) -> None:
    """Estimated LVR rate against gap variance, with the closed-form curve."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    est_var = [row["gap_variance_estimate"] for row in rows]
    est_lvr = [row["lvr_rate_estimate"] for row in rows]
    pred_var = [row["gap_variance_closed_form"] for row in rows]
    pred_lvr = [row["lvr_rate_closed_form"] for row in rows]
    ax.plot(pred_var, pred_lvr, "-", color="gray", label="closed form")
    ax.plot(est_var, est_lvr, "o", label="estimate")
    for row, x, y in zip(rows, est_var, est_lvr):
        ax.annotate(f"{row['activeness']:g}", (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.set_xlabel("gap variance")
    ax.set_ylabel("LVR rate")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_control_figure(gamma: float, lambda_grid: np.ndarray, losses: np.ndarray,
                        optimum: float, gammas: np.ndarray, optima: np.ndarray,
                        path: Path | str) -> None:
    """Loss profile at one gamma and the optimal activeness across gamma."""
    fig, (ax_loss, ax_opt) = plt.subplots(1, 2, figsize=(10, 4))
    ax_loss.plot(lambda_grid, losses)
    ax_loss.axvline(optimum, color="gray", linestyle="--", label=f"optimum {optimum:.4f}")
    ax_loss.set_xlabel("activeness")
    ax_loss.set_ylabel(f"leading-order loss (gamma={gamma:g})")
    ax_loss.legend(fontsize=8)
    ax_opt.plot(gammas, optima)
    ax_opt.set_xlabel("gamma")
    ax_opt.set_ylabel("optimal activeness")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
