"""Figures for CLI records (opt-in via --plot)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _column(record, name):
    i = record.series_columns.index(name)
    return np.array([row[i] for row in record.series], float)


def plot_record(record, path) -> None:
    """Render a record with a series to an image file; raises ValueError otherwise."""
    cmd = record.command
    if not record.series:
        raise ValueError(f"record of {cmd!r} has no series to plot")
    fig = plt.figure(figsize=(6, 4.5))
    if cmd in ("lorentz-trajectory", "free-particle"):
        ax = fig.add_subplot(111)
        t = _column(record, "t")
        for c in ("x", "y", "z"):
            ax.plot(t, _column(record, c), ".-", ms=3, label=c)
        ax.set_xlabel("t")
        ax.set_ylabel("position")
        ax.legend()
    elif cmd == "hydrogen-spectrum":
        ax = fig.add_subplot(111)
        nr, kap, eps = (_column(record, c) for c in ("n_r", "kappa", "epsilon"))
        m = record.inputs.get("mass", 1.0)
        for k in np.unique(kap):
            sel = kap == k
            ax.plot(nr[sel] + k, eps[sel] - m, "o", label=f"kappa={int(k)}")
        ax.set_xlabel("n_r + |kappa|")
        ax.set_ylabel("epsilon - m")
        ax.legend()
    elif cmd == "sphere-grid":
        ax = fig.add_subplot(111, projection="3d")
        th, ph = _column(record, "theta"), _column(record, "phi")
        ax.scatter(np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th))
        ax.set_box_aspect((1, 1, 1))
    elif cmd in ("oscillator", "opzeros"):
        ax = fig.add_subplot(111)
        x = _column(record, "x")
        ax.plot(x, np.zeros_like(x), "o")
        ax.set_xlabel("x")
        ax.set_yticks([])
    else:
        plt.close(fig)
        raise ValueError(f"no figure defined for {cmd!r}")
    ax.set_title(cmd)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
