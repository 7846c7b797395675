"""Feed-file loading and validation.

The figure feeds are plain CSVs produced by the experiment harness:
long-form (t, x[, y], hf, mf, lf, abs_err_mf, abs_err_lf) tables and
loss traces (epoch, stage, loss). Error columns are consumed as-is and
never recomputed here.
"""

import numpy as np


class FeedError(ValueError):
    """Invalid or incomplete feed file."""


def load_csv(path):
    """Read a CSV with a header row; numeric columns become float arrays."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise FeedError(f"{path}: empty input")
        names = header.split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        raise FeedError(f"{path}: no data rows")
    cols = {}
    for j, name in enumerate(names):
        raw = [r[j] for r in rows]
        try:
            cols[name] = np.array([float(v) for v in raw])
        except ValueError:
            cols[name] = np.array(raw)
    return cols


def require_columns(cols, names, path=""):
    missing = [n for n in names if n not in cols]
    if missing:
        raise FeedError(f"{path}: missing column(s) {', '.join(missing)}")


def field_frames(cols, value_col, with_y=False):
    """Reshape a long-form feed column into (times, axes..., frames)."""
    t = cols["t"]
    times = np.unique(t)
    x = np.unique(cols["x"])
    if with_y:
        y = np.unique(cols["y"])
        frames = np.full((len(times), len(x), len(y)), np.nan)
        ti = np.searchsorted(times, t)
        xi = np.searchsorted(x, cols["x"])
        yi = np.searchsorted(y, cols["y"])
        frames[ti, xi, yi] = cols[value_col]
        return times, x, y, frames
    frames = np.full((len(times), len(x)), np.nan)
    ti = np.searchsorted(times, t)
    xi = np.searchsorted(x, cols["x"])
    frames[ti, xi] = cols[value_col]
    return times, x, frames
