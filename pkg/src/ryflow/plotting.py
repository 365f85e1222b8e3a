"""SVG line plots of a run's time series."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SERIES = (
    ("R_min", r"$R_{\min}(t)$"),
    ("volume", r"$\mathrm{Vol}(t)$"),
    ("f_max", r"$f_{\max}(t)$"),
)

matplotlib.rcParams["svg.hashsalt"] = "ryflow"


def plot_records(records, out_dir, stem="run"):
    """Write one SVG per series in SERIES; returns the written paths."""
    out_dir = Path(out_dir)
    t = [r.t for r in records]
    paths = []
    for key, label in SERIES:
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        ax.plot(t, [getattr(r, key) for r in records], lw=1.5, color="k")
        ax.set_xlabel(r"$t$")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        path = out_dir / f"{stem}_{key}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths
