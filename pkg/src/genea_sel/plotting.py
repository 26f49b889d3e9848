"""Figure rendering for the report commands (matplotlib, file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path: Path) -> Path:
    path = Path(path)
    # fixed metadata keeps SVG output byte-identical across runs
    meta = {"Date": None} if path.suffix == ".svg" else {}
    matplotlib.rcParams["svg.hashsalt"] = "genea-sel"
    fig.savefig(path, metadata=meta, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_cdfs(path: Path, curves: dict, title: str = "", xlabel: str = "h",
              bands: dict | None = None) -> Path:
    """Overlay CDF curves; ``curves`` maps a label to ``(x, y)``, ``bands`` a label to a half-width."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in curves.items():
        (line,) = ax.step(x, y, where="post", label=label) if len(x) > 400 else ax.plot(x, y, label=label)
        if bands and label in bands:
            y = np.asarray(y)
            ax.fill_between(x, np.clip(y - bands[label], 0, 1), np.clip(y + bands[label], 0, 1),
                            color=line.get_color(), alpha=0.15, linewidth=0)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("P(R <= h)")
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_mean_vs_alpha(path: Path, alphas, means, stderrs, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(alphas, means, yerr=2 * np.asarray(stderrs), marker="o", capsize=3)
    ax.set_xlabel("alpha")
    ax.set_ylabel("E[R]")
    if title:
        ax.set_title(title)
    return _save(fig, path)
