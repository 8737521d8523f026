"""Figures for sweep and crossover-table reports.

Rendering uses the non-interactive Agg backend so the CLI works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "lines.linewidth": 1.5,
    "savefig.dpi": 150,
    # fixed metadata keeps repeated renders identical
    "svg.hashsalt": "teleportability",
}


def _finish(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None} if path.suffix.lower() == ".png" else None)
    plt.close(fig)
    return path


def plot_sweep(rows, path, title: str | None = None) -> Path:
    """Score against alpha, one colour per k.

    Solid lines are the swept model, dashed lines the noiseless resource and
    dotted horizontals the classical score for the same k.
    """
    ks = sorted({r.k for r in rows})
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 3.8))
        colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
        for i, k in enumerate(ks):
            sel = [r for r in rows if r.k == k]
            c = colors[i % len(colors)]
            alphas = [r.alpha for r in sel]
            ax.plot(alphas, [r.tau for r in sel], color=c, label=f"k = {k:g}")
            if sel and sel[0].model.kind != "noiseless":
                ax.plot(alphas, [r.tau_noiseless for r in sel], color=c, ls="--", lw=1.0)
            ax.axhline(sel[0].tau_classical, color=c, ls=":", lw=1.0)
        ax.set_xlabel(r"$\alpha$")
        ax.set_ylabel(r"$\tau_k$")
        if title is None and rows:
            title = rows[0].model.to_text()
        if title:
            ax.set_title(title)
        ax.legend(loc="best")
        return _finish(fig, path)


def plot_table1(rows, path) -> Path:
    """Crossover alpha against k, with the published values where known."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        ks = [r.k for r in rows]
        vals = [r.alpha_nk if r.alpha_nk is not None else float("nan") for r in rows]
        ax.plot(ks, vals, "o-", label="derived")
        pub = [(r.k, r.published) for r in rows if r.published is not None]
        if pub:
            ax.plot(*zip(*pub), "s", mfc="none", label="published")
        if rows:
            ax.axhline(rows[0].alpha_cl, color="0.5", ls=":", lw=1.0, label=r"$\alpha_{cl}$")
        ax.set_xlabel("k")
        ax.set_ylabel(r"$\alpha_n^k$")
        ax.legend(loc="best")
        return _finish(fig, path)
