"""Figure rendering for suite reports.

Writes PNG files next to the delimited outputs: per-function convergence
curves, per-function fit overlays (first seed), and a cross-configuration
MSE summary. Everything here is presentation only; the CSV/JSON artifacts
are the canonical record.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import benchmarks, expansion, mlp  # noqa: E402
from .harness import SuiteReport, config_summary  # noqa: E402

_DENSE_GRID = 800


def _first_seed(report: SuiteReport) -> int:
    if report.seeds:
        return report.seeds[0]
    return min(r.seed for r in report.runs)


def render_convergence_figure(report: SuiteReport, fn, path: Path) -> None:
    seed = _first_seed(report)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in report.configs():
        runs = [r for r in report.select(config=name, fn=fn) if r.seed == seed]
        if not runs or len(runs[0].trace) == 0:
            continue
        losses = runs[0].trace.losses()
        ax.semilogy(range(1, len(losses) + 1), losses, label=name, linewidth=1.2)
    ax.axhline(report.runs[0].target_mse, color="gray", linestyle=":", linewidth=1,
               label="target")
    ax.set_xlabel("iteration")
    ax.set_ylabel("train MSE")
    ax.set_title(f"{fn.value}: {fn.label} (seed {seed})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_fit_figure(report: SuiteReport, fn, path: Path) -> None:
    seed = _first_seed(report)
    xs = np.linspace(benchmarks.DOMAIN[0], benchmarks.DOMAIN[1], _DENSE_GRID)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(xs, benchmarks.evaluate(fn, xs), "k-", linewidth=1.6, label="target")
    for name in report.configs():
        runs = [r for r in report.select(config=name, fn=fn) if r.seed == seed]
        if not runs or runs[0].final_params.size == 0:
            continue
        r = runs[0]
        model = mlp.MlpModel(arch=r.config.architecture(), params=r.final_params)
        preds = mlp.forward_batch(model, expansion.expand_xs(xs, r.config.expansion))
        ax.plot(xs, preds, linewidth=1.0, alpha=0.85, label=name)
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.set_title(f"{fn.value}: {fn.label} (seed {seed})")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_summary_figure(report: SuiteReport, path: Path) -> None:
    rows = config_summary(report)
    names = [row["config"] for row in rows]
    means = [row["test_mse_mean"] for row in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(names, means, color="tab:blue")
    ax.set_yscale("log")
    ax.set_ylabel("mean final test MSE")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_suite_figures(report: SuiteReport, fig_dir: str | Path) -> None:
    fig_dir = Path(fig_dir)
    fig_dir.mkdir(parents=True, exist_ok=True)
    for fn in report.functions():
        render_convergence_figure(report, fn, fig_dir / f"convergence_{fn.value}.png")
        render_fit_figure(report, fn, fig_dir / f"fit_{fn.value}.png")
    render_summary_figure(report, fig_dir / "summary_mse.png")
