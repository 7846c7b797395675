"""Two-stage multifidelity training.

Stage 1 fits a low-fidelity network to abundant quantum solver data over the
full time window. Stage 2 freezes it and trains a linear and a nonlinear
correction head on sparse classical data restricted to the training window,
blended by a learnable convex weight alpha that an alpha^n penalty pushes
toward the linear head. Coordinates are min/max-normalized per axis with
the statistics of the set each network was trained on; the low-fidelity
predictions entering the heads are normalized with the low-fidelity target
statistics.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, TrainingAbortError
from .kan import KanNetwork, Workspace
from .optim import AdamState, adam_step
from .splines import SplineSpec


@dataclass(frozen=True)
class TrainConfig:
    lf_epochs: int = 1000
    hf_epochs: int = 4000
    learning_rate: float = 1e-3
    lambda_alpha: float = 0.0
    alpha_exponent: int = 4
    time_padding: float = 2.0  # spline-domain headroom around the HF window
    seed: int = 0

    def __post_init__(self):
        if self.lf_epochs <= 0 or self.hf_epochs <= 0:
            raise ConfigError("epoch counts must be positive")
        if self.lambda_alpha < 0:
            raise ConfigError("lambda_alpha must be non-negative")


@dataclass
class AxisStats:
    """Per-axis min/max used for linear mapping onto [-1, 1]."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_data(cls, data: np.ndarray) -> "AxisStats":
        return cls(np.min(data, axis=0), np.max(data, axis=0))

    def normalize(self, data: np.ndarray) -> np.ndarray:
        span = np.where(self.hi > self.lo, self.hi - self.lo, 1.0)
        return 2.0 * (data - self.lo) / span - 1.0

    def to_dict(self):
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["lo"], dtype=float), np.asarray(d["hi"], dtype=float))


@dataclass
class Dataset:
    """Coordinate rows (x[, y], t), target rows, and per-row region tags.

    Stats are those of this set and travel with it; the time column is the
    last input column.
    """

    inputs: np.ndarray
    targets: np.ndarray
    is_extrap: np.ndarray
    coord_stats: AxisStats
    target_stats: AxisStats
    meta: dict = field(default_factory=dict)

    @classmethod
    def build(cls, inputs, targets, cutoff_time, meta=None):
        inputs = np.asarray(inputs, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if targets.ndim == 1:
            targets = targets[:, None]
        if inputs.shape[0] != targets.shape[0]:
            raise ConfigError("inputs and targets disagree on row count")
        is_extrap = inputs[:, -1] > cutoff_time + 1e-12
        meta = dict(meta or {})
        meta["cutoff_time"] = cutoff_time
        return cls(inputs, targets, is_extrap,
                   AxisStats.from_data(inputs), AxisStats.from_data(targets),
                   meta)

    @property
    def n_samples(self):
        return self.inputs.shape[0]

    def training_rows(self) -> "Dataset":
        keep = ~self.is_extrap
        sub = Dataset(self.inputs[keep], self.targets[keep],
                      self.is_extrap[keep], self.coord_stats, self.target_stats,
                      dict(self.meta))
        sub.coord_stats = AxisStats.from_data(sub.inputs)
        sub.target_stats = AxisStats.from_data(sub.targets)
        return sub


def _mse_and_upstream(pred, targets):
    r = pred - targets
    loss = float(np.mean(np.sum(r * r, axis=1)))
    return loss, 2.0 * r / r.shape[0]


def train_lf(lf_data: Dataset, cfg: TrainConfig, dims, spec: SplineSpec,
             rng: np.random.Generator):
    """Stage 1: fit the low-fidelity surrogate. Returns (net, loss trace)."""
    if dims[0] != lf_data.inputs.shape[1] or dims[-1] != lf_data.targets.shape[1]:
        raise ConfigError(f"LF dims {dims} do not match dataset shapes")
    net = KanNetwork(dims, spec).init_params(rng)
    x = lf_data.coord_stats.normalize(lf_data.inputs)
    t = lf_data.targets
    input_basis = net.precompute_input_basis(x)
    ws = Workspace()
    state = AdamState(learning_rate=cfg.learning_rate)
    trace = np.empty(cfg.lf_epochs)
    for epoch in range(cfg.lf_epochs):
        pred, caches = net.forward(x, input_basis=input_basis, ws=ws)
        loss, up = _mse_and_upstream(pred, t)
        if not np.isfinite(loss):
            raise TrainingAbortError(f"LF loss non-finite at epoch {epoch}",
                                     epoch=epoch)
        trace[epoch] = loss
        grads, _ = net.backward(caches, up, need_input_grad=False)
        adam_step(net.parameters(), net.flat_grads(grads), state)
    return net, trace


@dataclass
class MultifidelityModel:
    """Frozen LF surrogate plus the two correction heads and the blend.

    The heads consume coordinates normalized with the statistics of the
    high-fidelity training region and low-fidelity predictions normalized
    with the low-fidelity target statistics. Past the training cutoff the
    normalized time leaves the spline support: the spline contributions of
    the time edges vanish there and the correction rides on the silu base
    and the in-range low-fidelity-prediction edges, which is what lets the
    blend arbitrate between graceful (affine) and aggressive (spline)
    extrapolation behavior.
    """

    lf_net: KanNetwork
    lin_net: KanNetwork
    nl_net: KanNetwork
    lf_coord_stats: AxisStats
    hf_coord_stats: AxisStats | None = None
    qlf_stats: AxisStats | None = None
    alpha_raw: float = 0.5
    alpha_fixed: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return float(np.clip(self.alpha_raw, 0.0, 1.0))

    def lf_predict(self, coords: np.ndarray) -> np.ndarray:
        x = self.lf_coord_stats.normalize(coords)
        y, _ = self.lf_net.forward(x)
        return y

    def head_inputs(self, coords: np.ndarray, q_lf: np.ndarray) -> np.ndarray:
        if self.hf_coord_stats is None or self.qlf_stats is None:
            raise ConfigError("model has no stage-2 statistics yet")
        return np.hstack([self.hf_coord_stats.normalize(coords),
                          self.qlf_stats.normalize(q_lf)])

    def mf_forward(self, coords: np.ndarray, parts: bool = False):
        """Blend alpha * nl + (1 - alpha) * lin at raw coordinates."""
        q_lf = self.lf_predict(coords)
        h = self.head_inputs(coords, q_lf)
        q_nl, _ = self.nl_net.forward(h)
        q_lin, _ = self.lin_net.forward(h)
        a = self.alpha
        q_mf = a * q_nl + (1.0 - a) * q_lin
        if parts:
            return q_mf, {"lf": q_lf, "nl": q_nl, "lin": q_lin}
        return q_mf


def build_model(lf_net: KanNetwork, lf_coord_stats: AxisStats, head_dims,
                spec: SplineSpec, rng: np.random.Generator,
                qlf_stats: AxisStats | None = None) -> MultifidelityModel:
    """Assemble the stage-2 model. Both heads share head_dims; the linear one
    uses degree-1 single-interval splines with the base path disabled, so it
    is exactly affine on the clamped domain. Keeping it layered matters for
    the optimization: a single affine layer trains far too slowly to keep up
    with the nonlinear head under the shared blended loss."""
    nl = KanNetwork(head_dims, spec).init_params(rng)
    lin = KanNetwork(head_dims, SplineSpec(1, 1), use_base=False)
    for layer in lin.layers:
        layer.spline_coeffs = rng.normal(
            0.0, 0.1 / layer.in_dim ** 0.25, layer.spline_coeffs.shape)
    return MultifidelityModel(lf_net=lf_net, lin_net=lin, nl_net=nl,
                              lf_coord_stats=lf_coord_stats,
                              qlf_stats=qlf_stats)


def freeze_alpha(model: MultifidelityModel, value: float) -> MultifidelityModel:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {value}")
    model.alpha_raw = float(value)
    model.alpha_fixed = True
    return model


def train_mf(model: MultifidelityModel, hf_data: Dataset, cfg: TrainConfig):
    """Stage 2: train the correction heads and the blend on the training-region
    rows of hf_data. Returns (model, loss trace, alpha trace).

    The loss is the blended-prediction MSE plus an anchoring MSE on the
    linear head alone plus the alpha^n penalty. Without the anchor the two
    heads share a null space (any opposite drift cancels in the blend) and
    co-adapt into individually meaningless functions, which destroys
    extrapolation; anchoring the linear head to the data pins both heads.
    """
    train = hf_data.training_rows()
    coords = train.inputs
    targets = train.targets
    # pad the time axis by a couple of training-windows on both sides: the
    # heads then see time at deliberately low spline resolution (so they
    # cannot memorize the training window along t) and extrapolation beyond
    # the cutoff stays on trained cubic support; the spatial and q_LF axes
    # keep the full resolution
    lo = train.coord_stats.lo.copy()
    hi = train.coord_stats.hi.copy()
    span = hi[-1] - lo[-1]
    lo[-1] -= cfg.time_padding * span
    hi[-1] += cfg.time_padding * span
    model.hf_coord_stats = AxisStats(lo, hi)
    q_lf = model.lf_predict(coords)
    if model.qlf_stats is None:
        model.qlf_stats = AxisStats.from_data(q_lf)
    h = model.head_inputs(coords, q_lf)

    lin, nl = model.lin_net, model.nl_net
    basis_nl = nl.precompute_input_basis(h)
    basis_lin = lin.precompute_input_basis(h)
    ws_nl, ws_lin = Workspace(), Workspace()

    params = lin.parameters() + nl.parameters()
    n_lin = len(lin.parameters())
    alpha_arr = np.array([model.alpha_raw])
    if not model.alpha_fixed:
        params = params + [("alpha_raw", alpha_arr)]
    state = AdamState(learning_rate=cfg.learning_rate)
    trace = np.empty(cfg.hf_epochs)
    alpha_trace = np.empty(cfg.hf_epochs)
    n_exp = cfg.alpha_exponent

    for epoch in range(cfg.hf_epochs):
        a = float(np.clip(alpha_arr[0], 0.0, 1.0)) if not model.alpha_fixed \
            else model.alpha
        q_nl, caches_nl = nl.forward(h, input_basis=basis_nl, ws=ws_nl)
        q_lin, caches_lin = lin.forward(h, input_basis=basis_lin, ws=ws_lin)
        pred = a * q_nl + (1.0 - a) * q_lin
        mse, up = _mse_and_upstream(pred, targets)
        mse_lin, up_lin = _mse_and_upstream(q_lin, targets)
        loss = mse + mse_lin + cfg.lambda_alpha * a ** n_exp
        if not np.isfinite(loss):
            raise TrainingAbortError(f"MF loss non-finite at epoch {epoch}",
                                     epoch=epoch)
        trace[epoch] = loss
        g_nl, _ = nl.backward(caches_nl, a * up, need_input_grad=False)
        g_lin, _ = lin.backward(caches_lin, (1.0 - a) * up + up_lin,
                                need_input_grad=False)
        grads = lin.flat_grads(g_lin) + nl.flat_grads(g_nl)
        if not model.alpha_fixed:
            g_alpha = float(np.sum(up * (q_nl - q_lin))) \
                + cfg.lambda_alpha * n_exp * a ** (n_exp - 1)
            grads = grads + [np.array([g_alpha])]
        adam_step(params, grads, state)
        if not model.alpha_fixed:
            np.clip(alpha_arr, 0.0, 1.0, out=alpha_arr)
            model.alpha_raw = float(alpha_arr[0])
        alpha_trace[epoch] = model.alpha
    return model, trace, alpha_trace


# ---------------------------------------------------------------------------
# checkpointing
# ---------------------------------------------------------------------------

def _net_to_dict(net: KanNetwork):
    return {
        "dims": net.dims,
        "grid_size": net.spec.grid_size,
        "degree": net.spec.degree,
        "use_base": net.use_base,
        "params": {path: arr.tolist() for path, arr in net.parameters()},
    }


def _net_from_dict(d) -> KanNetwork:
    net = KanNetwork(d["dims"], SplineSpec(d["grid_size"], d["degree"]),
                     use_base=d["use_base"])
    arrays = []
    for path, arr in net.parameters():
        arrays.append(np.asarray(d["params"][path], dtype=np.float64))
    net.set_flat_parameters(arrays)
    return net


def save_model(model: MultifidelityModel, path) -> None:
    doc = {
        "lf_net": _net_to_dict(model.lf_net),
        "lin_net": _net_to_dict(model.lin_net),
        "nl_net": _net_to_dict(model.nl_net),
        "lf_coord_stats": model.lf_coord_stats.to_dict(),
        "hf_coord_stats": model.hf_coord_stats.to_dict()
        if model.hf_coord_stats else None,
        "qlf_stats": model.qlf_stats.to_dict() if model.qlf_stats else None,
        "alpha_raw": model.alpha_raw,
        "alpha_fixed": model.alpha_fixed,
        "meta": model.meta,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> MultifidelityModel:
    with open(path) as fh:
        doc = json.load(fh)
    return MultifidelityModel(
        lf_net=_net_from_dict(doc["lf_net"]),
        lin_net=_net_from_dict(doc["lin_net"]),
        nl_net=_net_from_dict(doc["nl_net"]),
        lf_coord_stats=AxisStats.from_dict(doc["lf_coord_stats"]),
        hf_coord_stats=AxisStats.from_dict(doc["hf_coord_stats"])
        if doc.get("hf_coord_stats") else None,
        qlf_stats=AxisStats.from_dict(doc["qlf_stats"])
        if doc["qlf_stats"] else None,
        alpha_raw=doc["alpha_raw"],
        alpha_fixed=doc["alpha_fixed"],
        meta=doc.get("meta", {}),
    )
