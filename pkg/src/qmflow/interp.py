"""Linear interpolation helpers for cross-resolution field comparison."""

import numpy as np


def periodic_linear_1d(xq: np.ndarray, values: np.ndarray, length: float = 1.0) -> np.ndarray:
    """Interpolate a periodic 1D field sampled at j*length/n onto query points."""
    n = values.size
    dx = length / n
    pos = np.mod(np.asarray(xq, dtype=np.float64), length) / dx
    j0 = np.floor(pos).astype(int) % n
    frac = pos - np.floor(pos)
    j1 = (j0 + 1) % n
    return (1.0 - frac) * values[j0] + frac * values[j1]


def bilinear_2d(xq: np.ndarray, yq: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of values[i, j] on the unit square (i -> x, j -> y)."""
    n = values.shape[0]
    h = 1.0 / (n - 1)
    px = np.clip(np.asarray(xq, dtype=np.float64), 0.0, 1.0) / h
    py = np.clip(np.asarray(yq, dtype=np.float64), 0.0, 1.0) / h
    i0 = np.minimum(np.floor(px).astype(int), n - 2)
    j0 = np.minimum(np.floor(py).astype(int), n - 2)
    fx = px - i0
    fy = py - j0
    return ((1 - fx) * (1 - fy) * values[i0, j0]
            + fx * (1 - fy) * values[i0 + 1, j0]
            + (1 - fx) * fy * values[i0, j0 + 1]
            + fx * fy * values[i0 + 1, j0 + 1])


def time_linear(tq: np.ndarray, times: np.ndarray, frames: np.ndarray) -> np.ndarray:
    """Linear interpolation along the leading (time) axis of ``frames``.

    ``times`` must be strictly increasing; queries are clamped to the span.
    Returns an array of shape (len(tq), *frames.shape[1:]).
    """
    times = np.asarray(times, dtype=np.float64)
    tq = np.clip(np.asarray(tq, dtype=np.float64), times[0], times[-1])
    idx = np.clip(np.searchsorted(times, tq, side="right") - 1, 0, len(times) - 2)
    t0, t1 = times[idx], times[idx + 1]
    w = np.where(t1 > t0, (tq - t0) / np.where(t1 > t0, t1 - t0, 1.0), 0.0)
    shape = (len(tq),) + (1,) * (frames.ndim - 1)
    w = w.reshape(shape)
    return (1.0 - w) * frames[idx] + w * frames[idx + 1]
