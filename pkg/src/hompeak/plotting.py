"""Static SVG plots of interferograms and HBT scans."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "hompeak"

_SVG_META = {"Date": None, "Creator": "hompeak"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(Path(path), format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_interferogram(ifg, path, fitted=None, title: str | None = None):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    t_us = ifg.taus * 1e6
    if np.any(ifg.stderr > 0):
        ax.errorbar(t_us, ifg.values, yerr=ifg.stderr, fmt="o", ms=3, lw=0.8, color="k")
    else:
        ax.plot(t_us, ifg.values, "-", color="k", lw=1.2)
        ax.plot(t_us, ifg.values, "o", color="k", ms=1.5)
    if fitted is not None:
        dense = np.linspace(ifg.taus.min(), ifg.taus.max(), 1000)
        ax.plot(dense * 1e6, fitted(dense), "-", color="tab:red", lw=1.2, label="fit")
        ax.legend(frameon=False)
    ax.set_xlabel("delay (µs)")
    ax.set_ylabel("coincidence")
    ax.set_title(title or f"HOM {ifg.kind.value}")
    _save(fig, path)


def plot_hbt(points, path, title: str | None = None):
    """g2 on the left axis, herald-A / herald-B coincidences on the right."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    delay = np.array([p.delay for p in points]) * 1e9
    g2 = np.array([np.nan if p.g2 is None else p.g2 for p in points])
    err = np.array([np.nan if p.g2_stderr is None else p.g2_stderr for p in points])
    ax.errorbar(delay, g2, yerr=err, fmt="s", color="tab:blue", ms=4, lw=0.8, label="g2(0)")
    ax.plot(delay, [p.g2_expected for p in points], "-", color="tab:blue", lw=0.8, alpha=0.6)
    ax.axhline(1.0, color="0.6", lw=0.6, ls="--")
    ax.set_xlabel("herald delay (ns)")
    ax.set_ylabel("g2(0)")
    ax2 = ax.twinx()
    ax2.plot(delay, [p.counts.n_A for p in points], "^-", color="k", ms=3, lw=0.8, label="Dg-DA")
    ax2.plot(delay, [p.counts.n_B for p in points], "o-", color="tab:red", ms=3, lw=0.8, label="Dg-DB")
    ax2.set_ylabel("heralded counts")
    ax.set_title(title or "heralded HBT")
    _save(fig, path)
