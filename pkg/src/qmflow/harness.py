"""Experiment orchestration: dataset generation from both solvers, two-stage
training for every table row, region-split relative-L2 metrics, and CSV/JSON
artifact emission for the figures tooling.

Artifact tree per run: runs/<name>/{config.json, lf.csv, hf_train.csv,
hf_eval.csv, model.json, predictions.csv, metrics.json, loss_trace.csv}.
"""

import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classical import (BurgersParams, CavityParams, burgers_hf_solve,
                        cavity_hf_solve, default_burgers_dt, default_cavity_dt)
from .errors import ConfigError
from .fields import Field, Grid1D, Grid2D
from .interp import bilinear_2d, periodic_linear_1d, time_linear
from .multifidelity import (Dataset, MultifidelityModel, TrainConfig,
                            build_model, freeze_alpha, load_model, save_model,
                            train_lf, train_mf)
from .qlbm import D1Q3Params, D2Q5Params, qlbm_burgers_solve, qlbm_cavity_solve
from .snapshots import (export_run_snapshots, read_sidecar, read_table,
                        write_sidecar, write_table)
from .splines import SplineSpec


@dataclass
class ExperimentConfig:
    problem: str = "burgers"
    seed: int = 0
    data_dir: str = ""
    outdir: str = ""
    # time windows
    lf_span: float = 0.0       # 0 -> problem default
    hf_cutoff: float = 0.0
    horizon: float = 0.0
    n_snapshots: int = 0
    # grids
    lf_grid: int = 16
    hf_grid: int = 0
    # physics
    viscosity: float = 0.01
    reynolds: float = 100.0
    lid_speed: float = 1.0
    # lattice mapping
    lf_time_scale: float = 0.0
    stream_sweeps: int = 1
    # networks
    lf_dims: tuple = ()
    head_dims: tuple = ()
    grid_res: int = 5       # B-spline G of the nonlinear correction head
    lf_grid_res: int = 5    # B-spline G of the low-fidelity surrogate
    # training
    lf_epochs: int = 1000
    hf_epochs: int = 4000
    learning_rate: float = 1e-3
    lambda_alpha: float = 0.0
    alpha_fixed: float = -1.0   # < 0 means learned
    check_oracle: bool = True

    _DEFAULTS = {
        "burgers": dict(lf_span=0.5, hf_cutoff=0.25, horizon=0.5, n_snapshots=64,
                        hf_grid=256, lf_time_scale=0.165,
                        lf_dims=(2, 6, 6, 1), head_dims=(3, 12, 12, 1)),
        "cavity": dict(lf_span=3.0, hf_cutoff=2.0, horizon=3.0, n_snapshots=31,
                       hf_grid=64, lf_time_scale=0.5,
                       lf_dims=(3, 8, 8, 2), head_dims=(5, 10, 10, 2)),
    }

    def __post_init__(self):
        if self.problem not in self._DEFAULTS:
            raise ConfigError(f"unknown problem {self.problem!r}")
        for key, val in self._DEFAULTS[self.problem].items():
            if not getattr(self, key):
                setattr(self, key, val)
        self.lf_dims = tuple(self.lf_dims)
        self.head_dims = tuple(self.head_dims)
        if self.n_snapshots < 1:
            raise ConfigError("n_snapshots must be at least 1")
        if not self.hf_cutoff < self.horizon <= self.lf_span + 1e-12:
            raise ConfigError("need hf_cutoff < horizon <= lf_span")
        if self.alpha_fixed >= 0 and self.alpha_fixed > 1:
            raise ConfigError("alpha_fixed must lie in [0, 1]")

    @property
    def quantities(self):
        return ("u",) if self.problem == "burgers" else ("u", "v")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d):
        fields = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in fields})

    @classmethod
    def from_file(cls, path, overrides=None):
        """Flat key=value config file; '#' starts a comment."""
        values = {}
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"bad config line: {line!r}")
                key, val = (s.strip() for s in line.split("=", 1))
                values[key] = val
        values.update(overrides or {})
        return cls.from_dict({k: _coerce(cls, k, v) for k, v in values.items()})


def _coerce(cls, key, val):
    if not isinstance(val, str):
        return val
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    t = types[key]
    if t == "int":
        return int(val)
    if t == "float":
        return float(val)
    if t == "bool":
        return val.lower() in ("1", "true", "yes", "on")
    if t == "tuple":
        return tuple(int(p) for p in val.replace(" ", "").split(",") if p)
    return val


def relative_l2(pred: np.ndarray, ref: np.ndarray) -> float:
    """||pred - ref||_2 / ||ref||_2 over the given sample set."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    ref = np.asarray(ref, dtype=np.float64).ravel()
    if pred.shape != ref.shape:
        raise ConfigError("relative_l2 needs equal-length inputs")
    denom = float(np.linalg.norm(ref))
    if denom == 0.0:
        raise ConfigError("relative_l2 undefined for an all-zero reference")
    return float(np.linalg.norm(pred - ref)) / denom


# ---------------------------------------------------------------------------
# dataset generation
# ---------------------------------------------------------------------------

def _long_form_1d(times, xs, frames):
    t_grid, x_grid = np.meshgrid(times, xs, indexing="ij")
    return (np.column_stack([x_grid.ravel(), t_grid.ravel()]),
            frames.reshape(-1, 1))


def _long_form_2d(times, xs, frames_u, frames_v):
    nt, n = frames_u.shape[0], frames_u.shape[1]
    t_grid = np.repeat(times, n * n)
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    x_grid = np.tile(xg.ravel(), nt)
    y_grid = np.tile(yg.ravel(), nt)
    coords = np.column_stack([x_grid, y_grid, t_grid])
    targets = np.column_stack([frames_u.reshape(-1), frames_v.reshape(-1)])
    return coords, targets


def _dedupe_snapshot_times(requested, dt, t_end):
    n_steps = int(round(t_end / dt))
    steps = sorted({min(n_steps, int(round(t / dt))) for t in requested})
    return [s * dt for s in steps]


def generate_datasets(cfg: ExperimentConfig):
    """Run both solvers and build (lf, hf_train, hf_eval) datasets.

    hf_eval carries the interpolated raw-LF baseline values in its meta.
    Artifacts are persisted under cfg.data_dir when set.
    """
    if cfg.problem == "burgers":
        lf, hf_train, hf_eval = _generate_burgers(cfg)
    else:
        lf, hf_train, hf_eval = _generate_cavity(cfg)
    if cfg.data_dir:
        os.makedirs(cfg.data_dir, exist_ok=True)
        _persist_dataset(os.path.join(cfg.data_dir, "lf.csv"), cfg, lf)
        _persist_dataset(os.path.join(cfg.data_dir, "hf_train.csv"), cfg, hf_train)
        _persist_dataset(os.path.join(cfg.data_dir, "hf_eval.csv"), cfg, hf_eval)
    return lf, hf_train, hf_eval


def _generate_burgers(cfg):
    eval_times = np.linspace(0.0, cfg.horizon, cfg.n_snapshots)
    hgrid = Grid1D(cfg.hf_grid)
    u0 = Field(0.5 * np.exp(-40.0 * (hgrid.points - 0.35) ** 2))
    dt = default_burgers_dt(u0.values, hgrid, cfg.viscosity)
    hp = BurgersParams(cfg.viscosity, dt, cfg.horizon)
    hf = burgers_hf_solve(u0, hgrid, hp, list(eval_times))
    hf_t = np.array([f.time for f in hf])
    hf_vals = np.stack([f.values for f in hf])

    lp = D1Q3Params(n_sites=cfg.lf_grid, viscosity=cfg.viscosity,
                    time_scale=cfg.lf_time_scale)
    lgrid = Grid1D(cfg.lf_grid)
    u0l = 0.5 * np.exp(-40.0 * (lgrid.points - 0.35) ** 2)
    lf_times = _dedupe_snapshot_times(np.linspace(0.0, cfg.lf_span,
                                                  cfg.n_snapshots),
                                      lp.dt, cfg.lf_span)
    lf_snaps, lf_meta = qlbm_burgers_solve(u0l, lp, lf_times,
                                           check_oracle=cfg.check_oracle)
    lf_t = np.array([f.time for f in lf_snaps])
    lf_vals = np.stack([f.values for f in lf_snaps])

    lf_in, lf_tg = _long_form_1d(lf_t, lgrid.points, lf_vals)
    lf_data = Dataset.build(lf_in, lf_tg, cfg.hf_cutoff,
                            meta={"solver": lf_meta, "grid": cfg.lf_grid,
                                  "times": lf_t})
    hf_in, hf_tg = _long_form_1d(hf_t, hgrid.points, hf_vals)
    hf_meta = {"solver": {"solver": "burgers-upwind-fd", "dt": dt,
                          "viscosity": cfg.viscosity, "grid": cfg.hf_grid},
               "grid": cfg.hf_grid, "times": hf_t}
    hf_eval = Dataset.build(hf_in, hf_tg, cfg.hf_cutoff, meta=hf_meta)
    hf_train = hf_eval.training_rows()

    lf_on_hf = np.stack([periodic_linear_1d(hgrid.points, v) for v in lf_vals])
    hf_eval.meta["lf_interp"] = time_linear(hf_t, lf_t, lf_on_hf).reshape(-1, 1)
    if cfg.data_dir:
        os.makedirs(cfg.data_dir, exist_ok=True)
        export_run_snapshots(
            os.path.join(cfg.data_dir, "lf_solver.csv"),
            {"t": lf_in[:, 1], "x": lf_in[:, 0], "u": lf_tg[:, 0]},
            lf_meta)
        export_run_snapshots(
            os.path.join(cfg.data_dir, "hf_solver.csv"),
            {"t": hf_in[:, 1], "x": hf_in[:, 0], "u": hf_tg[:, 0]},
            hf_meta["solver"])
    return lf_data, hf_train, hf_eval


def _generate_cavity(cfg):
    eval_times = np.linspace(0.0, cfg.horizon, cfg.n_snapshots)
    hgrid = Grid2D(cfg.hf_grid)
    hp = CavityParams(reynolds=cfg.reynolds,
                      dt=default_cavity_dt(hgrid, cfg.reynolds, cfg.lid_speed),
                      t_end=cfg.horizon, lid_speed=cfg.lid_speed)
    hf = cavity_hf_solve(hp, hgrid, list(eval_times))
    hf_t = np.array([om.time for om, _, _, _ in hf])
    hf_u = np.stack([u.values for _, _, u, _ in hf])
    hf_v = np.stack([v.values for _, _, _, v in hf])

    lp = D2Q5Params(grid_side=cfg.lf_grid, reynolds=cfg.reynolds,
                    lid_speed=cfg.lid_speed, time_scale=cfg.lf_time_scale,
                    stream_sweeps=cfg.stream_sweeps)
    lf_times = _dedupe_snapshot_times(np.linspace(0.0, cfg.lf_span,
                                                  cfg.n_snapshots),
                                      lp.dt, cfg.lf_span)
    lf_snaps, lf_meta = qlbm_cavity_solve(lp, cfg.lf_span, lf_times,
                                          check_oracle=cfg.check_oracle)
    lf_t = np.array([om.time for om, _, _, _ in lf_snaps])
    lf_u = np.stack([u.values for _, _, u, _ in lf_snaps])
    lf_v = np.stack([v.values for _, _, _, v in lf_snaps])
    lgrid = Grid2D(cfg.lf_grid)

    lf_in, lf_tg = _long_form_2d(lf_t, lgrid.points, lf_u, lf_v)
    lf_data = Dataset.build(lf_in, lf_tg, cfg.hf_cutoff,
                            meta={"solver": lf_meta, "grid": cfg.lf_grid,
                                  "times": lf_t})
    hf_in, hf_tg = _long_form_2d(hf_t, hgrid.points, hf_u, hf_v)
    hf_meta = {"solver": {"solver": "cavity-psi-omega-fd", "dt": hp.dt,
                          "reynolds": cfg.reynolds, "grid": cfg.hf_grid},
               "grid": cfg.hf_grid, "times": hf_t}
    hf_eval = Dataset.build(hf_in, hf_tg, cfg.hf_cutoff, meta=hf_meta)
    hf_train = hf_eval.training_rows()

    # raw-LF baseline: bilinear in space per LF frame, then linear in time
    pts_x, pts_y = np.meshgrid(hgrid.points, hgrid.points, indexing="ij")
    interp_u = np.stack([bilinear_2d(pts_x.ravel(), pts_y.ravel(), f)
                         for f in lf_u])
    interp_v = np.stack([bilinear_2d(pts_x.ravel(), pts_y.ravel(), f)
                         for f in lf_v])
    at_u = time_linear(hf_t, lf_t, interp_u)
    at_v = time_linear(hf_t, lf_t, interp_v)
    hf_eval.meta["lf_interp"] = np.column_stack([at_u.reshape(-1),
                                                 at_v.reshape(-1)])
    if cfg.data_dir:
        os.makedirs(cfg.data_dir, exist_ok=True)
        om = np.stack([o.values for o, _, _, _ in lf_snaps]).reshape(-1)
        ps = np.stack([p_.values for _, p_, _, _ in lf_snaps]).reshape(-1)
        export_run_snapshots(
            os.path.join(cfg.data_dir, "lf_solver.csv"),
            {"t": lf_in[:, 2], "x": lf_in[:, 0], "y": lf_in[:, 1],
             "omega": om, "psi": ps, "u": lf_tg[:, 0], "v": lf_tg[:, 1]},
            lf_meta)
        export_run_snapshots(
            os.path.join(cfg.data_dir, "hf_solver.csv"),
            {"t": hf_in[:, 2], "x": hf_in[:, 0], "y": hf_in[:, 1],
             "u": hf_tg[:, 0], "v": hf_tg[:, 1]},
            hf_meta["solver"])
    return lf_data, hf_train, hf_eval


def _persist_dataset(path, cfg, data: Dataset):
    cols = {}
    names = ("x", "t") if cfg.problem == "burgers" else ("x", "y", "t")
    for j, name in enumerate(names):
        cols[name] = data.inputs[:, j]
    for j, name in enumerate(cfg.quantities):
        cols[name] = data.targets[:, j]
    if "lf_interp" in data.meta:
        for j, name in enumerate(cfg.quantities):
            cols[f"lf_interp_{name}"] = data.meta["lf_interp"][:, j]
    cols["region"] = ["extrap" if e else "train" for e in data.is_extrap]
    write_table(path, cols)
    meta = {k: v for k, v in data.meta.items() if k != "lf_interp"}
    meta["cutoff_time"] = data.meta.get("cutoff_time")
    write_sidecar(os.path.splitext(path)[0] + ".json", meta)


def load_dataset(path, cfg) -> Dataset:
    cols = read_table(path)
    names = ("x", "t") if cfg.problem == "burgers" else ("x", "y", "t")
    inputs = np.column_stack([cols[n] for n in names])
    targets = np.column_stack([cols[q] for q in cfg.quantities])
    meta = read_sidecar(os.path.splitext(path)[0] + ".json")
    data = Dataset.build(inputs, targets, meta["cutoff_time"], meta=meta)
    if f"lf_interp_{cfg.quantities[0]}" in cols:
        data.meta["lf_interp"] = np.column_stack(
            [cols[f"lf_interp_{q}"] for q in cfg.quantities])
    return data


def load_or_generate_datasets(cfg: ExperimentConfig):
    if cfg.data_dir and os.path.exists(os.path.join(cfg.data_dir, "lf.csv")):
        lf = load_dataset(os.path.join(cfg.data_dir, "lf.csv"), cfg)
        hf_train = load_dataset(os.path.join(cfg.data_dir, "hf_train.csv"), cfg)
        hf_eval = load_dataset(os.path.join(cfg.data_dir, "hf_eval.csv"), cfg)
        return lf, hf_train, hf_eval
    return generate_datasets(cfg)


# ---------------------------------------------------------------------------
# metrics and the experiment driver
# ---------------------------------------------------------------------------

@dataclass
class MetricsReport:
    problem: str
    quantities: tuple
    mf: dict            # {quantity: {region: err or None}}
    baseline_lf: dict   # interpolated raw quantum data
    surrogate_lf: dict  # trained LF network evaluated on the HF grid
    alpha: float
    wall_time_s: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return dataclasses.asdict(self)


def _region_metrics(pred, ref, is_extrap):
    """Relative L2 per region; extrapolation metrics are absent (None) when
    the region is empty."""
    out = {"train": relative_l2(pred[~is_extrap], ref[~is_extrap])}
    out["extrap"] = (relative_l2(pred[is_extrap], ref[is_extrap])
                     if np.any(is_extrap) else None)
    out["full"] = relative_l2(pred, ref)
    return out


def _split_by_quantity(pred, ref, is_extrap, quantities):
    return {q: _region_metrics(pred[:, j], ref[:, j], is_extrap)
            for j, q in enumerate(quantities)}


def run_experiment(cfg: ExperimentConfig) -> MetricsReport:
    """Stage-1 + stage-2 training and region-split evaluation; persists the
    full artifact tree when cfg.outdir is set."""
    lf_data, hf_train, hf_eval = load_or_generate_datasets(cfg)

    seq = np.random.SeedSequence(cfg.seed)
    rng_lf, rng_heads = [np.random.default_rng(s) for s in seq.spawn(2)]
    tcfg = TrainConfig(lf_epochs=cfg.lf_epochs, hf_epochs=cfg.hf_epochs,
                       learning_rate=cfg.learning_rate,
                       lambda_alpha=cfg.lambda_alpha, seed=cfg.seed)

    t0 = time.perf_counter()
    lf_net, lf_trace = train_lf(lf_data, tcfg, list(cfg.lf_dims),
                                SplineSpec(cfg.lf_grid_res, 3), rng_lf)
    model = build_model(lf_net, lf_data.coord_stats, list(cfg.head_dims),
                        SplineSpec(cfg.grid_res, 3), rng_heads,
                        qlf_stats=lf_data.target_stats)
    if cfg.alpha_fixed >= 0:
        freeze_alpha(model, cfg.alpha_fixed)
    model, mf_trace, alpha_trace = train_mf(model, hf_train, tcfg)
    wall = time.perf_counter() - t0

    pred, parts = model.mf_forward(hf_eval.inputs, parts=True)
    is_extrap = hf_eval.is_extrap
    mf_metrics = _split_by_quantity(pred, hf_eval.targets, is_extrap,
                                    cfg.quantities)
    sur_metrics = _split_by_quantity(parts["lf"], hf_eval.targets, is_extrap,
                                     cfg.quantities)
    base = hf_eval.meta.get("lf_interp")
    base_metrics = (_split_by_quantity(base, hf_eval.targets, is_extrap,
                                       cfg.quantities)
                    if base is not None else {})

    report = MetricsReport(
        problem=cfg.problem, quantities=cfg.quantities, mf=mf_metrics,
        baseline_lf=base_metrics, surrogate_lf=sur_metrics,
        alpha=model.alpha, wall_time_s=wall,
        diagnostics={
            "lf_loss_first": float(lf_trace[0]),
            "lf_loss_last": float(lf_trace[-1]),
            "mf_loss_first": float(mf_trace[0]),
            "mf_loss_last": float(mf_trace[-1]),
            "alpha_min": float(np.min(alpha_trace)),
            "alpha_max": float(np.max(alpha_trace)),
            "lf_solver_oracle_gap": lf_data.meta.get("solver", {}).get(
                "max_oracle_gap"),
        })

    if cfg.outdir:
        _persist_run(cfg, model, report, lf_trace, mf_trace, hf_eval, pred,
                     parts, base)
    return report


def _persist_run(cfg, model, report, lf_trace, mf_trace, hf_eval, pred, parts,
                 base):
    os.makedirs(cfg.outdir, exist_ok=True)
    with open(os.path.join(cfg.outdir, "config.json"), "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
    save_model(model, os.path.join(cfg.outdir, "model.json"))
    stages = ["lf"] * len(lf_trace) + ["mf"] * len(mf_trace)
    write_table(os.path.join(cfg.outdir, "loss_trace.csv"), {
        "epoch": np.arange(len(stages)).astype(float),
        "stage": stages,
        "loss": np.concatenate([lf_trace, mf_trace]),
    })
    cols = {}
    names = ("x", "t") if cfg.problem == "burgers" else ("x", "y", "t")
    order = {"burgers": ("t", "x"), "cavity": ("t", "x", "y")}[cfg.problem]
    coords = {n: hf_eval.inputs[:, j] for j, n in enumerate(names)}
    for n in order:
        cols[n] = coords[n]
    for j, q in enumerate(cfg.quantities):
        suffix = f"_{q}" if len(cfg.quantities) > 1 else ""
        cols[f"hf{suffix}"] = hf_eval.targets[:, j]
        cols[f"mf{suffix}"] = pred[:, j]
        cols[f"lf{suffix}"] = base[:, j] if base is not None else parts["lf"][:, j]
        cols[f"abs_err_mf{suffix}"] = np.abs(pred[:, j] - hf_eval.targets[:, j])
        cols[f"abs_err_lf{suffix}"] = np.abs(cols[f"lf{suffix}"]
                                             - hf_eval.targets[:, j])
    write_table(os.path.join(cfg.outdir, "predictions.csv"), cols)
    with open(os.path.join(cfg.outdir, "metrics.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)


def dump_figure_feeds(run_dir: str) -> list:
    """Emit per-quantity figure-feed CSVs (t, x[, y], hf, mf, lf, abs_err_mf,
    abs_err_lf) from a run's predictions.csv."""
    with open(os.path.join(run_dir, "config.json")) as fh:
        cfg = ExperimentConfig.from_dict(json.load(fh))
    preds = read_table(os.path.join(run_dir, "predictions.csv"))
    coord_names = ("t", "x") if cfg.problem == "burgers" else ("t", "x", "y")
    out_paths = []
    for q in cfg.quantities:
        suffix = f"_{q}" if len(cfg.quantities) > 1 else ""
        cols = {n: preds[n] for n in coord_names}
        for base_name in ("hf", "mf", "lf", "abs_err_mf", "abs_err_lf"):
            cols[base_name] = preds[base_name + suffix]
        name = f"feed_{q}.csv" if len(cfg.quantities) > 1 else "feed.csv"
        path = os.path.join(run_dir, name)
        write_table(path, cols)
        out_paths.append(path)
    return out_paths


# ---------------------------------------------------------------------------
# table reproduction
# ---------------------------------------------------------------------------

B_SERIES = {
    "B1": dict(lambda_alpha=0.0, grid_res=5),
    "B2": dict(lambda_alpha=1e-6, grid_res=5),
    "B3": dict(lambda_alpha=1e-5, grid_res=5),
    "B4": dict(lambda_alpha=1e-4, grid_res=5),
    "B5": dict(lambda_alpha=0.0, grid_res=5, alpha_fixed=1.0),
    "B6": dict(lambda_alpha=0.0, grid_res=3),
    "B7": dict(lambda_alpha=0.0, grid_res=7),
}

C_SERIES = {
    "C1": dict(lambda_alpha=1e-3),
    "C2": dict(lambda_alpha=1e-6),
    "C3": dict(lambda_alpha=1e-5),
    "C4": dict(lambda_alpha=1e-4),
    "C5": dict(lambda_alpha=0.0, alpha_fixed=1.0),
    "C6": dict(lambda_alpha=1e-5, lf_dims=(3, 5, 5, 2), head_dims=(5, 5, 5, 2)),
    "C7": dict(lambda_alpha=1e-5, lf_dims=(3, 10, 10, 2),
               head_dims=(5, 10, 10, 2)),
    "C8": dict(lambda_alpha=1e-5, lf_dims=(3, 15, 15, 2),
               head_dims=(5, 15, 15, 2)),
}


def row_config(series: str, row: str, seed: int, base_dir: str,
               **overrides) -> ExperimentConfig:
    series = series.lower()
    table = {"b": B_SERIES, "c": C_SERIES}.get(series)
    if table is None or row not in table:
        raise ConfigError(f"unknown row {row!r} in series {series!r}")
    problem = "burgers" if series == "b" else "cavity"
    kw = dict(table[row])
    kw.update(overrides)
    return ExperimentConfig(problem=problem, seed=seed,
                            data_dir=os.path.join(base_dir, f"data_{problem}"),
                            outdir=os.path.join(base_dir, f"{row}_s{seed}"),
                            **kw)


def _run_row(args):
    cfg_dict = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    try:
        report = run_experiment(cfg)
        return cfg_dict["outdir"], report.to_dict(), None
    except Exception as exc:  # per-row isolation
        return cfg_dict["outdir"], None, f"{type(exc).__name__}: {exc}"


def reproduce_tables(series: str, seeds, base_dir: str, workers: int = 2,
                     rows=None, **overrides):
    """Run every row of a series for each seed and aggregate the metrics.

    Emits table.csv (long form with mean/std/median per cell) and table.txt
    (rendered). Row failures are isolated and marked in the table.
    """
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("need at least one seed")
    series = series.lower()
    table = {"b": B_SERIES, "c": C_SERIES}[series]
    rows = list(rows) if rows else list(table)
    # generate shared datasets once up front
    probe = row_config(series, rows[0], seeds[0], base_dir, **overrides)
    load_or_generate_datasets(probe)

    jobs = [row_config(series, row, seed, base_dir, **overrides).to_dict()
            for row in rows for seed in seeds]
    results = {}
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for outdir, rep, err in pool.map(_run_row, jobs):
                results[outdir] = (rep, err)
    else:
        for job in jobs:
            outdir, rep, err = _run_row(job)
            results[outdir] = (rep, err)

    agg_rows = []
    baseline = None
    for row in rows:
        reports = []
        errors = []
        for seed in seeds:
            outdir = os.path.join(base_dir, f"{row}_s{seed}")
            rep, err = results[outdir]
            if rep is None:
                errors.append(err)
            else:
                reports.append(rep)
                if baseline is None and rep["baseline_lf"]:
                    baseline = rep["baseline_lf"]
        agg_rows.append((row, reports, errors))

    table_cols = {"row": [], "metric": [], "mean": [], "std": [], "median": []}

    def add(row, metric, values):
        table_cols["row"].append(row)
        table_cols["metric"].append(metric)
        vals = np.array([v for v in values if v is not None], dtype=float)
        if vals.size:
            table_cols["mean"].append(float(vals.mean()))
            table_cols["std"].append(float(vals.std()))
            table_cols["median"].append(float(np.median(vals)))
        else:
            table_cols["mean"].append(float("nan"))
            table_cols["std"].append(float("nan"))
            table_cols["median"].append(float("nan"))

    quantities = ("u",) if series == "b" else ("u", "v")
    if baseline:
        for q in quantities:
            for region in ("train", "extrap", "full"):
                add("LF-baseline", f"l2_{region}_{q}", [baseline[q][region]])
    lines = []
    for row, reports, errors in agg_rows:
        if not reports:
            lines.append(f"{row}: FAILED ({'; '.join(errors)})")
            continue
        for q in quantities:
            for region in ("train", "extrap", "full"):
                add(row, f"l2_{region}_{q}",
                    [r["mf"][q][region] for r in reports])
        add(row, "alpha", [r["alpha"] for r in reports])
        add(row, "wall_time_s", [r["wall_time_s"] for r in reports])
        med = {m: table_cols["median"][i]
               for i, (rr, m) in enumerate(zip(table_cols["row"],
                                               table_cols["metric"]))
               if rr == row}
        cells = [f"{row}"]
        for q in quantities:
            cells.append(f"L2tr_{q}={med[f'l2_train_{q}']:.4f}")
            ex = med[f"l2_extrap_{q}"]
            cells.append(f"L2ex_{q}={ex:.4f}" if np.isfinite(ex)
                         else f"L2ex_{q}=n/a")
            cells.append(f"L2full_{q}={med[f'l2_full_{q}']:.4f}")
        cells.append(f"alpha={med['alpha']:.3f}")
        cells.append(f"time={med['wall_time_s']:.1f}s")
        lines.append("  ".join(cells))
        if errors:
            lines.append(f"{row}: {len(errors)} seed(s) FAILED")

    os.makedirs(base_dir, exist_ok=True)
    write_table(os.path.join(base_dir, "table.csv"), table_cols)
    header = [f"series {series.upper()} over seeds {seeds} (median per cell)"]
    if baseline:
        base_cells = ["LF-baseline"]
        for q in quantities:
            base_cells.append(f"L2tr_{q}={baseline[q]['train']:.4f}")
            base_cells.append(f"L2ex_{q}={baseline[q]['extrap']:.4f}")
            base_cells.append(f"L2full_{q}={baseline[q]['full']:.4f}")
        header.append("  ".join(base_cells))
    text = "\n".join(header + lines) + "\n"
    with open(os.path.join(base_dir, "table.txt"), "w") as fh:
        fh.write(text)
    return table_cols, text
