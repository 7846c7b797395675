"""Kolmogorov-Arnold layers: per-edge learnable univariate functions.

Each edge carries phi(x) = base_weight * silu(x) + spline_weight * sum_i c_i B_i(x)
with the splines supported on [-1, 1]; outside that range the spline part
vanishes and the silu base carries the edge. Node values are sums of
incoming edges and layers compose. Forward and backward passes are exact (manual) and run in
fused single-threaded numba kernels over the banded spline representation,
so full-batch training is fast without an autodiff framework. A Workspace
reuses the per-batch tables across epochs; without one, forward evaluation
allocates fresh buffers and is safe to share read-only.
"""

import numpy as np
from numba import njit

from .errors import ConfigError
from .splines import BandedBasis, SplineSpec, banded_basis


@njit(cache=True, fastmath=True)
def _forward_kernel(vals, idx, sil, ct, bw, use_base, y, p_basis):
    """ct is the scaled coefficient tensor in flat (in, P, out) layout and bw
    the base weights as flat (in, out), so the inner output loop runs over
    contiguous memory and vectorizes."""
    n, i_dim, kk1 = vals.shape
    o_dim = y.shape[1]
    yloc = np.empty(o_dim)
    for row in range(n):
        for o in range(o_dim):
            yloc[o] = 0.0
        for i in range(i_dim):
            off0 = (i * p_basis + idx[row, i]) * o_dim
            for m in range(kk1):
                vm = vals[row, i, m]
                off = off0 + m * o_dim
                for o in range(o_dim):
                    yloc[o] += vm * ct[off + o]
            if use_base:
                sv = sil[row, i]
                boff = i * o_dim
                for o in range(o_dim):
                    yloc[o] += sv * bw[boff + o]
        for o in range(o_dim):
            y[row, o] = yloc[o]


@njit(cache=True, fastmath=True)
def _backward_kernel(up, vals, dvals, idx, sil, dsil, ct, bw,
                     use_base, need_dx, g_ct, g_bw, dx, p_basis):
    """Accumulates dL/d(ctilde) and dL/d(base_weight) in flat (in, P, out)
    layout and, when requested, the input gradient. Out-of-domain inputs
    carry zero basis (and derivative) values, so only the base path
    contributes there. Serial row order keeps the reductions bitwise
    deterministic."""
    n, i_dim, kk1 = vals.shape
    o_dim = up.shape[1]
    tmp = np.empty(o_dim)
    for row in range(n):
        for i in range(i_dim):
            off0 = (i * p_basis + idx[row, i]) * o_dim
            for m in range(kk1):
                vm = vals[row, i, m]
                off = off0 + m * o_dim
                for o in range(o_dim):
                    g_ct[off + o] += vm * up[row, o]
            if use_base:
                sv = sil[row, i]
                boff = i * o_dim
                for o in range(o_dim):
                    g_bw[boff + o] += sv * up[row, o]
            if need_dx:
                if use_base:
                    dsv = dsil[row, i]
                    boff = i * o_dim
                    for o in range(o_dim):
                        tmp[o] = dsv * bw[boff + o]
                else:
                    for o in range(o_dim):
                        tmp[o] = 0.0
                for m in range(kk1):
                    dm = dvals[row, i, m]
                    off = off0 + m * o_dim
                    for o in range(o_dim):
                        tmp[o] += dm * ct[off + o]
                dxa = 0.0
                for o in range(o_dim):
                    dxa += up[row, o] * tmp[o]
                dx[row, i] = dxa


_EMPTY2 = np.empty((0, 0))


class Workspace:
    """Reusable per-(layer, batch) basis tables for training loops."""

    def __init__(self):
        self._tables = {}

    def tables(self, key, n_values, spec, with_base):
        got = self._tables.get(key)
        if got is None or got.vals.shape[0] != n_values or got.spec != spec:
            got = BandedBasis(n_values, spec, with_base)
            self._tables[key] = got
        return got


class KanLayer:
    """One spline layer. Parameters: spline_coeffs (out, in, G+k),
    base_weight and spline_weight (out, in). Layers with use_base=False drop
    the silu path entirely, which makes a degree-1 single-interval layer
    exactly affine on the spline domain."""

    def __init__(self, in_dim, out_dim, spec: SplineSpec, use_base=True):
        if in_dim < 1 or out_dim < 1:
            raise ConfigError("layer dimensions must be positive")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.spec = spec
        self.use_base = use_base
        p = spec.n_basis
        self.spline_coeffs = np.zeros((out_dim, in_dim, p))
        self.base_weight = np.ones((out_dim, in_dim)) / in_dim if use_base else None
        self.spline_weight = np.ones((out_dim, in_dim))

    def init_params(self, rng: np.random.Generator):
        std = 0.1 / self.in_dim ** 0.25  # variance 0.1^2 / sqrt(in_dim)
        self.spline_coeffs = rng.normal(0.0, std, self.spline_coeffs.shape)
        self.spline_weight = np.ones((self.out_dim, self.in_dim))
        if self.use_base:
            # unit base weights would saturate the fixed [-1, 1] domain of the
            # next layer once in_dim > 1; scale so node values start inside it
            self.base_weight = np.ones((self.out_dim, self.in_dim)) / self.in_dim

    def parameters(self):
        out = [("spline_coeffs", self.spline_coeffs),
               ("spline_weight", self.spline_weight)]
        if self.use_base:
            out.append(("base_weight", self.base_weight))
        return out

    def set_parameter(self, name, value):
        setattr(self, name, value)

    def compute_basis(self, x: np.ndarray, ws: Workspace | None = None,
                      key=None) -> BandedBasis:
        out = None
        if ws is not None:
            out = ws.tables(key if key is not None else id(self),
                            x.size, self.spec, self.use_base)
        return banded_basis(x.ravel(), self.spec, out=out, with_base=self.use_base)

    def forward(self, x: np.ndarray, basis_tables: BandedBasis | None = None,
                ws: Workspace | None = None):
        """x: (n, in_dim) -> (y (n, out_dim), cache)."""
        n, d = x.shape
        if d != self.in_dim:
            raise ConfigError(f"expected {self.in_dim} inputs, got {d}")
        bb = basis_tables if basis_tables is not None else self.compute_basis(x, ws)
        kk1 = self.spec.degree + 1
        p = self.spec.n_basis
        vals = bb.vals.reshape(n, d, kk1)
        idx = bb.idx.reshape(n, d)
        sil = bb.sil.reshape(n, d) if self.use_base else _EMPTY2
        dsil = bb.dsil.reshape(n, d) if self.use_base else _EMPTY2
        ct = np.ascontiguousarray(
            (self.spline_weight[:, :, None] * self.spline_coeffs).transpose(1, 2, 0)
        ).ravel()
        bw = (np.ascontiguousarray(self.base_weight.T).ravel() if self.use_base
              else _EMPTY2.ravel())
        y = np.empty((n, self.out_dim))
        _forward_kernel(vals, idx, sil, ct, bw, self.use_base, y, p)
        cache = (x, vals, bb.dvals.reshape(n, d, kk1), idx, sil, dsil, ct, bw)
        return y, cache

    def backward(self, cache, upstream: np.ndarray, need_input_grad=True):
        """upstream: (n, out_dim) -> (grads dict, dx or None)."""
        x, vals, dvals, idx, sil, dsil, ct, bw = cache
        n = upstream.shape[0]
        p = self.spec.n_basis
        g_ct = np.zeros(self.in_dim * p * self.out_dim)
        g_bw = (np.zeros(self.in_dim * self.out_dim) if self.use_base
                else _EMPTY2.ravel())
        dx = np.empty((n, self.in_dim)) if need_input_grad else _EMPTY2
        up = np.ascontiguousarray(upstream)
        _backward_kernel(up, vals, dvals, idx, sil, dsil, ct, bw,
                         self.use_base, need_input_grad, g_ct, g_bw, dx, p)
        g_ctilde = g_ct.reshape(self.in_dim, p, self.out_dim).transpose(2, 0, 1)
        grads = {
            "spline_coeffs": g_ctilde * self.spline_weight[:, :, None],
            "spline_weight": np.einsum("oip,oip->oi", g_ctilde, self.spline_coeffs),
        }
        if self.use_base:
            grads["base_weight"] = g_bw.reshape(self.in_dim, self.out_dim).T.copy()
        return grads, (dx if need_input_grad else None)


class KanNetwork:
    """Stack of KanLayers with chained dims, e.g. [2, 6, 6, 1]."""

    def __init__(self, dims, spec: SplineSpec, use_base=True):
        if len(dims) < 2:
            raise ConfigError("need at least input and output dims")
        self.dims = list(dims)
        self.spec = spec
        self.use_base = use_base
        self.layers = [KanLayer(a, b, spec, use_base=use_base)
                       for a, b in zip(dims, dims[1:])]

    def init_params(self, rng: np.random.Generator):
        for layer in self.layers:
            layer.init_params(rng)
        return self

    def precompute_input_basis(self, x: np.ndarray) -> BandedBasis:
        """First-layer basis tables for a fixed full-batch input."""
        return self.layers[0].compute_basis(x)

    def forward(self, x: np.ndarray, input_basis: BandedBasis | None = None,
                ws: Workspace | None = None):
        """x: (n, dims[0]) -> (y, caches)."""
        caches = []
        h = x
        for li, layer in enumerate(self.layers):
            tables = input_basis if li == 0 else None
            h, cache = layer.forward(h, basis_tables=tables, ws=ws)
            caches.append(cache)
        return h, caches

    def backward(self, caches, upstream: np.ndarray, need_input_grad=True):
        """Returns (list of per-layer grad dicts, gradient w.r.t. the input
        or None when not requested)."""
        grads = [None] * len(self.layers)
        g = upstream
        for li in range(len(self.layers) - 1, -1, -1):
            need = need_input_grad or li > 0
            grads[li], g = self.layers[li].backward(caches[li], g,
                                                    need_input_grad=need)
        return grads, g

    def parameters(self):
        """Flat list of (path, array) pairs, stable ordering."""
        out = []
        for li, layer in enumerate(self.layers):
            for name, arr in layer.parameters():
                out.append((f"layers[{li}].{name}", arr))
        return out

    def flat_grads(self, layer_grads):
        out = []
        for li, layer in enumerate(self.layers):
            for name, _ in layer.parameters():
                out.append(layer_grads[li][name])
        return out

    def set_flat_parameters(self, arrays):
        i = 0
        for layer in self.layers:
            for name, _ in layer.parameters():
                layer.set_parameter(name, arrays[i])
                i += 1

    def n_parameters(self):
        return sum(arr.size for _, arr in self.parameters())
