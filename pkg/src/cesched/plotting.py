"""Matplotlib figures for simulation reports."""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .simulator.report import Comparison, SimReport  # noqa: E402

# Fixed metadata keeps repeated renders byte-comparable.
_META = {"Software": None}


def plot_normalized(rows: Sequence[Comparison], path: str, title: str = "CES normalized to HMP"):
    """Grouped bars of CES time and energy relative to the HMP baseline."""
    names = [r.name for r in rows]
    x = range(len(rows))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(rows) + 2), 3.2))
    ax.bar([i - width / 2 for i in x], [r.time_ratio for r in rows], width,
           label="time", color="#4c72b0")
    ax.bar([i + width / 2 for i in x], [r.energy_ratio for r in rows], width,
           label="energy", color="#dd8452")
    ax.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("CES / HMP")
    ax.set_title(title)
    ax.legend(frameon=False, ncol=2)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def plot_timeline(report: SimReport, path: str):
    """Per-core Gantt chart rebuilt from start/end trace events."""
    fig, ax = plt.subplots(figsize=(7.0, 0.45 * len(report.core_types) + 1.2))
    cmap = plt.get_cmap("tab10")
    open_at = {}
    for ev in report.trace:
        key = (ev.core, ev.thread)
        if ev.kind == "start":
            open_at[key] = ev.time
        elif ev.kind == "end" and key in open_at:
            t0 = open_at.pop(key)
            if ev.time > t0:
                ax.broken_barh([(t0, ev.time - t0)], (ev.core - 0.4, 0.8),
                               facecolors=cmap(ev.thread % 10))
    ax.set_yticks(range(len(report.core_types)))
    ax.set_yticklabels([f"{i} {ct}" for i, ct in enumerate(report.core_types)])
    ax.set_xlim(0, report.makespan or 1.0)
    ax.set_xlabel("time (s)")
    ax.set_title(f"{report.policy} on {report.machine}")
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
