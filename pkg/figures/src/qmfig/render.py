"""Figure kinds rendered from harness CSV artifacts.

Every kind is a pure function of its input files: fixed dpi, fixed color
scales shared across panels of one figure, and scrubbed metadata so that
re-rendering identical inputs is byte-identical.
"""

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import FeedError, field_frames, load_csv, require_columns

DPI = 150
_SAVE_KW = {"dpi": DPI, "metadata": {"Software": "qmfig"}}

KINDS = ("spacetime", "error-map", "snapshot-grid", "loss-curve", "table-render")


@dataclass
class FigureRequest:
    kind: str
    inputs: list
    output: str
    cutoff: float | None = None
    title: str = ""
    times: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FeedError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise FeedError("no input files given")
        for path in self.inputs:
            if not os.path.exists(path):
                raise FeedError(f"input file not found: {path}")


def render(request: FigureRequest) -> str:
    """Render one figure; returns the output path."""
    fn = {
        "spacetime": _render_spacetime,
        "error-map": _render_error_map,
        "snapshot-grid": _render_snapshot_grid,
        "loss-curve": _render_loss_curve,
        "table-render": _render_table,
    }[request.kind]
    fn(request)
    return request.output


def _save(fig, request):
    fig.savefig(request.output, **_SAVE_KW)
    plt.close(fig)


def _render_spacetime(request):
    """Three stacked spacetime heatmaps (reference / corrected / coarse) on a
    shared color scale, with a dashed line at the training cutoff."""
    cols = load_csv(request.inputs[0])
    require_columns(cols, ("t", "x", "hf", "mf", "lf"), request.inputs[0])
    panels = []
    for name in ("hf", "mf", "lf"):
        times, x, frames = field_frames(cols, name)
        panels.append((name.upper(), times, x, frames))
    vmin = min(np.nanmin(p[3]) for p in panels)
    vmax = max(np.nanmax(p[3]) for p in panels)
    fig, axes = plt.subplots(3, 1, figsize=(7.5, 7.0), sharex=True)
    for ax, (label, times, x, frames) in zip(axes, panels):
        im = ax.pcolormesh(times, x, frames.T, vmin=vmin, vmax=vmax,
                           cmap="viridis", shading="nearest")
        ax.set_ylabel(f"x ({label})")
        if request.cutoff is not None:
            ax.axvline(request.cutoff, color="white", ls="--", lw=1.2)
    axes[-1].set_xlabel("t")
    fig.colorbar(im, ax=axes, shrink=0.92, label="u")
    if request.title:
        axes[0].set_title(request.title)
    _save(fig, request)


def _render_error_map(request):
    """Pointwise |error| maps for the corrected and coarse solutions on a
    shared color scale."""
    cols = load_csv(request.inputs[0])
    require_columns(cols, ("t", "x", "abs_err_mf", "abs_err_lf"),
                    request.inputs[0])
    two_dim = "y" in cols
    if two_dim:
        # pool over y for the map: show worst-case error per (t, x) column
        panels = []
        for name in ("abs_err_mf", "abs_err_lf"):
            times, x, y, frames = field_frames(cols, name, with_y=True)
            panels.append((name, times, x, np.nanmax(frames, axis=2)))
    else:
        panels = []
        for name in ("abs_err_mf", "abs_err_lf"):
            times, x, frames = field_frames(cols, name)
            panels.append((name, times, x, frames))
    vmax = max(np.nanmax(p[3]) for p in panels)
    fig, axes = plt.subplots(2, 1, figsize=(7.5, 5.2), sharex=True)
    labels = {"abs_err_mf": "|corrected - reference|",
              "abs_err_lf": "|coarse - reference|"}
    for ax, (name, times, x, frames) in zip(axes, panels):
        im = ax.pcolormesh(times, x, frames.T, vmin=0.0, vmax=vmax,
                           cmap="magma", shading="nearest")
        ax.set_ylabel("x")
        ax.set_title(labels[name], fontsize=10)
        if request.cutoff is not None:
            ax.axvline(request.cutoff, color="cyan", ls="--", lw=1.2)
    axes[-1].set_xlabel("t")
    fig.colorbar(im, ax=axes, shrink=0.92)
    if request.title:
        fig.suptitle(request.title)
    _save(fig, request)


def _pick_times(times, requested, cutoff):
    if requested:
        want = requested
    elif cutoff is not None:
        want = [cutoff / 2.0, cutoff, float(times.max())]
    else:
        want = list(np.quantile(times, [0.33, 0.66, 1.0]))
    return [times[np.argmin(np.abs(times - w))] for w in want]


def _render_snapshot_grid(request):
    """3x3 grid of 2D field snapshots: rows reference / corrected / coarse,
    columns three time instants, shared color scale."""
    cols = load_csv(request.inputs[0])
    require_columns(cols, ("t", "x", "y", "hf", "mf", "lf"), request.inputs[0])
    frames = {}
    for name in ("hf", "mf", "lf"):
        times, x, y, f = field_frames(cols, name, with_y=True)
        frames[name] = f
    snap_times = _pick_times(times, request.times, request.cutoff)
    vmin = min(np.nanmin(frames[n]) for n in frames)
    vmax = max(np.nanmax(frames[n]) for n in frames)
    fig, axes = plt.subplots(3, len(snap_times),
                             figsize=(3.0 * len(snap_times), 8.0),
                             sharex=True, sharey=True)
    axes = np.atleast_2d(axes)
    for row, name in enumerate(("hf", "mf", "lf")):
        for col, t_snap in enumerate(snap_times):
            ti = int(np.argmin(np.abs(times - t_snap)))
            ax = axes[row, col]
            im = ax.pcolormesh(x, y, frames[name][ti].T, vmin=vmin, vmax=vmax,
                               cmap="RdBu_r", shading="nearest")
            ax.set_aspect("equal")
            if row == 0:
                marker = ""
                if request.cutoff is not None:
                    marker = " (extrap)" if t_snap > request.cutoff + 1e-12 else ""
                ax.set_title(f"t = {t_snap:.2f}{marker}", fontsize=10)
            if col == 0:
                ax.set_ylabel(name.upper())
    fig.colorbar(im, ax=axes, shrink=0.85)
    if request.title:
        fig.suptitle(request.title)
    _save(fig, request)


def _render_loss_curve(request):
    """Log-scale training-loss trace with a dashed marker at the transition
    from low-fidelity to multifidelity training."""
    cols = load_csv(request.inputs[0])
    require_columns(cols, ("epoch", "stage", "loss"), request.inputs[0])
    epochs = cols["epoch"]
    loss = cols["loss"]
    stages = cols["stage"]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.semilogy(epochs, loss, lw=1.0, color="tab:blue")
    mf_mask = stages == "mf"
    if mf_mask.any() and not mf_mask.all():
        ax.axvline(epochs[mf_mask][0], color="k", ls="--", lw=1.0)
    ax.set_xlabel("epoch")
    ax.set_ylabel("training loss")
    ax.set_title(request.title or "Training loss evolution")
    fig.tight_layout()
    _save(fig, request)


def _render_table(request):
    """Render an aggregated results table CSV as a figure."""
    cols = load_csv(request.inputs[0])
    names = list(cols)
    n_rows = len(cols[names[0]])
    cells = []
    for i in range(n_rows):
        row = []
        for name in names:
            v = cols[name][i]
            row.append(f"{v:.4g}" if isinstance(v, (float, np.floating)) else str(v))
        cells.append(row)
    fig, ax = plt.subplots(figsize=(1.4 * len(names), 0.32 * (n_rows + 2)))
    ax.axis("off")
    tab = ax.table(cellText=cells, colLabels=names, loc="center")
    tab.auto_set_font_size(False)
    tab.set_fontsize(8)
    if request.title:
        ax.set_title(request.title)
    _save(fig, request)
