"""Matplotlib rendering of aggregated series with shaded deviation bands."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .data import aggregate_series, gap_curves

# fixed palette and styling so identical inputs yield identical images
PALETTE = ("#1b6ca8", "#d1495b", "#2e933c", "#8c5383", "#c77b2e", "#5d5d5d")


def render(spec):
    """Render one panel; returns {series name: (x, mean, std)} as plotted.

    The returned arrays are exactly what the figure shows, so callers can
    verify the plotted means against independently recomputed values.
    """
    if spec.kind == "gap":
        curves = gap_curves(spec)
        labels = {s.name: s.label for s in spec.series}
    else:
        curves = {}
        labels = {}
        for s in spec.series:
            curves[s.name] = aggregate_series(s, spec)
            labels[s.name] = s.label

    fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=150)
    for k, (name, (x, mean, std)) in enumerate(curves.items()):
        color = PALETTE[k % len(PALETTE)]
        ax.plot(x, mean, color=color, lw=1.6, label=labels[name])
        ax.fill_between(x, mean - std, mean + std, color=color, alpha=0.2, lw=0)
    if spec.kind == "gap":
        ax.axhline(0.0, color="#5d5d5d", lw=0.9, ls="--")
    ax.set_xlabel(spec.xlabel or ("episode" if spec.reduce != "none" else "round"))
    default_y = f"average gap in {spec.metric}" if spec.kind == "gap" else spec.metric
    ax.set_ylabel(spec.ylabel or default_y)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.25, lw=0.5)
    fig.tight_layout()
    out_dir = os.path.dirname(spec.output)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    fig.savefig(spec.output, metadata={"Software": "coordplot"})
    plt.close(fig)
    return curves
