"""Uniform B-spline bases on [-1, 1] with (k+1)-fold clamped end knots.

The knot vector has G uniform interior intervals, giving G + k basis
functions. Only k+1 basis functions are nonzero at any point, so the
evaluation kernel returns a banded layout: the k+1 values (and derivatives)
per input plus the first nonzero basis index. Out-of-domain queries are
well-defined: the degree-1 single-interval basis extends linearly (keeping
such layers exactly affine everywhere); all other specs evaluate at the
clamped input, a continuous plateau.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigError


@dataclass(frozen=True)
class SplineSpec:
    grid_size: int  # interior interval count G
    degree: int     # spline order k

    def __post_init__(self):
        if self.grid_size < 1 or self.degree < 1:
            raise ConfigError("spline needs grid_size >= 1 and degree >= 1")

    @property
    def n_basis(self) -> int:
        return self.grid_size + self.degree

    @property
    def knots(self) -> np.ndarray:
        g, k = self.grid_size, self.degree
        interior = np.linspace(-1.0, 1.0, g + 1)
        return np.concatenate([np.full(k, -1.0), interior, np.full(k, 1.0)])


@njit(cache=True, fastmath=True)
def _banded_basis_kernel(x, knots, k, g, with_base, affine_ext,
                         vals, dvals, idx, sil, dsil):
    """Banded basis evaluation: vals/dvals get the k+1 nonzero (derivative)
    values per input, idx the first nonzero basis index.

    Out-of-domain handling: with affine_ext (degree-1 single-interval case)
    the two hat functions are extended linearly, so the layer stays exactly
    affine for all inputs. Otherwise the basis is evaluated at the clamped
    input (a continuous plateau outside [-1, 1]); the silu base always acts
    on the raw input.
    """
    n = x.shape[0]
    nloc = np.empty(k + 1)
    nprev = np.empty(k + 1)
    left = np.empty(k + 1)
    right = np.empty(k + 1)
    step = 2.0 / g
    for row in range(n):
        xv = x[row]
        if with_base:
            s = 1.0 / (1.0 + np.exp(-xv))
            sil[row] = xv * s
            dsil[row] = s * (1.0 + xv * (1.0 - s))
        if affine_ext:
            idx[row] = 0
            vals[row, 0] = 0.5 * (1.0 - xv)
            vals[row, 1] = 0.5 * (1.0 + xv)
            dvals[row, 0] = -0.5
            dvals[row, 1] = 0.5
            continue
        outside = False
        if xv < -1.0:
            xv = -1.0
            outside = True
        elif xv > 1.0:
            xv = 1.0
            outside = True
        i = int((xv + 1.0) / step)
        if i > g - 1:
            i = g - 1
        span = i + k  # knots[span] <= xv <= knots[span+1]
        nloc[0] = 1.0
        if k == 1:
            nprev[0] = 1.0  # degree-0 basis is the span indicator
        for j in range(1, k + 1):
            left[j] = xv - knots[span + 1 - j]
            right[j] = knots[span + j] - xv
            saved = 0.0
            for r in range(j):
                denom = right[r + 1] + left[j - r]
                temp = nloc[r] / denom if denom != 0.0 else 0.0
                nloc[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            nloc[j] = saved
            if j == k - 1:
                for r in range(k):
                    nprev[r] = nloc[r]
        idx[row] = i
        # derivatives from the degree k-1 values: nprev[r] = N_{i+1+r, k-1};
        # zero on the plateau outside the domain
        for m in range(k + 1):
            vals[row, m] = nloc[m]
            gidx = i + m
            lo = gidx + k
            dd = 0.0
            if not outside:
                if knots[lo] != knots[gidx] and m >= 1:
                    dd += k * nprev[m - 1] / (knots[lo] - knots[gidx])
                if knots[lo + 1] != knots[gidx + 1] and m <= k - 1:
                    dd -= k * nprev[m] / (knots[lo + 1] - knots[gidx + 1])
            dvals[row, m] = dd


_EMPTY = np.empty(0)


class BandedBasis:
    """Banded basis tables for a flat batch of input values."""

    __slots__ = ("vals", "dvals", "idx", "sil", "dsil", "spec")

    def __init__(self, n_values: int, spec: SplineSpec, with_base: bool):
        self.spec = spec
        self.vals = np.empty((n_values, spec.degree + 1))
        self.dvals = np.empty((n_values, spec.degree + 1))
        self.idx = np.empty(n_values, dtype=np.int64)
        self.sil = np.empty(n_values) if with_base else _EMPTY
        self.dsil = np.empty(n_values) if with_base else _EMPTY


def banded_basis(x: np.ndarray, spec: SplineSpec, out: BandedBasis | None = None,
                 with_base: bool = False) -> BandedBasis:
    """Evaluate the banded basis (and silu when requested) at flat x."""
    xf = np.ascontiguousarray(x, dtype=np.float64)
    if out is None:
        out = BandedBasis(xf.shape[0], spec, with_base)
    affine_ext = spec.degree == 1 and spec.grid_size == 1
    _banded_basis_kernel(xf, spec.knots, spec.degree, spec.grid_size, with_base,
                         affine_ext, out.vals, out.dvals, out.idx, out.sil,
                         out.dsil)
    return out


def bspline_basis_and_deriv(x: np.ndarray, spec: SplineSpec):
    """Dense (n, G+k) basis and first-derivative arrays at clamped x."""
    xf = np.atleast_1d(np.ascontiguousarray(x, dtype=np.float64))
    bb = banded_basis(xf, spec)
    n = xf.shape[0]
    basis = np.zeros((n, spec.n_basis))
    deriv = np.zeros((n, spec.n_basis))
    rows = np.arange(n)
    for m in range(spec.degree + 1):
        basis[rows, bb.idx + m] = bb.vals[:, m]
        deriv[rows, bb.idx + m] = bb.dvals[:, m]
    return basis, deriv


def bspline_basis(x, spec: SplineSpec) -> np.ndarray:
    """Cox-de Boor basis values at x (scalar or 1D array), clamped to [-1, 1]."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    basis, _ = bspline_basis_and_deriv(arr, spec)
    return basis[0] if np.ndim(x) == 0 else basis
