"""Figures for experiment CSVs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_experiment(rows, path, title: str | None = None) -> str:
    """Histogram of score gaps and a k-vs-gap scatter, saved to `path`."""
    rows = [r for r in rows if r["winner"] != "error"]
    gaps = np.array([r["gap"] for r in rows])
    ks = np.array([r["k"] for r in rows])
    part = np.array([r["partition"] for r in rows], dtype=bool)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.hist(gaps, bins=40, color="0.4")
    ax1.axvline(0.0, color="k", lw=0.8, ls="--")
    ax1.set_xlabel("g_alt - g_standard (nats)")
    ax1.set_ylabel("trials")

    ax2.scatter(ks[~part], gaps[~part], s=8, c="tab:blue", label="partition fails")
    ax2.scatter(ks[part], gaps[part], s=8, c="tab:orange", label="partition holds")
    ax2.axhline(0.0, color="k", lw=0.8, ls="--")
    ax2.axvline(1.0, color="k", lw=0.8, ls=":")
    ax2.set_xlabel("k")
    ax2.set_ylabel("gap (nats)")
    ax2.legend(frameon=False, fontsize=8)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
