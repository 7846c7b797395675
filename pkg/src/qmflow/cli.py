"""Command-line interface.

Exit codes: 0 success, 2 configuration validation error, 3 solver
divergence, 4 training abort.
"""

import json
import os
import sys

import click

from .errors import ConfigError, SolverDivergenceError, TrainingAbortError
from .harness import (ExperimentConfig, dump_figure_feeds, generate_datasets,
                      load_or_generate_datasets, reproduce_tables,
                      run_experiment)

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_TRAINING = 4


def _fail(exc):
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, ConfigError):
        sys.exit(EXIT_CONFIG)
    if isinstance(exc, SolverDivergenceError):
        sys.exit(EXIT_SOLVER)
    if isinstance(exc, TrainingAbortError):
        sys.exit(EXIT_TRAINING)
    raise exc


def _build_config(config_path, sets, **kw):
    overrides = {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        overrides[key.strip()] = val.strip()
    for key, val in kw.items():
        if val is not None:
            overrides[key] = val
    if config_path:
        return ExperimentConfig.from_file(config_path, overrides)
    coerced = {k: ExperimentConfig.__dict__ and v for k, v in overrides.items()}
    from .harness import _coerce
    return ExperimentConfig.from_dict(
        {k: _coerce(ExperimentConfig, k, v) for k, v in overrides.items()})


@click.group()
def main():
    """Hybrid quantum-classical multifidelity PDE experiments."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="flat key=value config file")
@click.option("--set", "sets", multiple=True, help="override key=value")
@click.option("--problem", type=click.Choice(["burgers", "cavity"]))
@click.option("--data-dir", "data_dir", type=click.Path())
def generate(config_path, sets, problem, data_dir):
    """Run both solvers and persist the lf/hf_train/hf_eval datasets."""
    try:
        cfg = _build_config(config_path, sets, problem=problem,
                            data_dir=data_dir)
        if not cfg.data_dir:
            raise ConfigError("generate needs --data-dir")
        generate_datasets(cfg)
        click.echo(f"datasets written to {cfg.data_dir}")
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--set", "sets", multiple=True)
@click.option("--problem", type=click.Choice(["burgers", "cavity"]))
@click.option("--run", "outdir", type=click.Path(), required=True,
              help="run directory for artifacts")
@click.option("--data-dir", "data_dir", type=click.Path(),
              help="dataset directory (defaults to the run directory)")
@click.option("--seed", type=int)
def train(config_path, sets, problem, outdir, data_dir, seed):
    """Train the two-stage model and evaluate it (writes the artifact tree)."""
    try:
        cfg = _build_config(config_path, sets, problem=problem, outdir=outdir,
                            data_dir=data_dir or outdir, seed=seed)
        report = run_experiment(cfg)
        click.echo(json.dumps(report.to_dict(), indent=2))
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--run", "outdir", type=click.Path(exists=True), required=True)
def evaluate(outdir):
    """Recompute metrics from a run's persisted predictions."""
    try:
        from .snapshots import read_table
        from .harness import relative_l2
        with open(os.path.join(outdir, "config.json")) as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
        preds = read_table(os.path.join(outdir, "predictions.csv"))
        cutoff = cfg.hf_cutoff
        is_extrap = preds["t"] > cutoff + 1e-12
        out = {}
        for q in cfg.quantities:
            suffix = f"_{q}" if len(cfg.quantities) > 1 else ""
            entry = {}
            for kind in ("mf", "lf"):
                pred, ref = preds[kind + suffix], preds["hf" + suffix]
                entry[kind] = {
                    "train": relative_l2(pred[~is_extrap], ref[~is_extrap]),
                    "extrap": relative_l2(pred[is_extrap], ref[is_extrap])
                    if is_extrap.any() else None,
                    "full": relative_l2(pred, ref),
                }
            out[q] = entry
        click.echo(json.dumps(out, indent=2))
    except Exception as exc:
        _fail(exc)


@main.command()
@click.option("--series", type=click.Choice(["b", "c"]), required=True)
@click.option("--seeds", default="0,1,2", help="comma-separated seed list")
@click.option("--out", "base_dir", type=click.Path(), required=True)
@click.option("--workers", type=int, default=2)
@click.option("--rows", default="", help="comma-separated subset of rows")
@click.option("--set", "sets", multiple=True)
def table(series, seeds, base_dir, workers, rows, sets):
    """Reproduce a full results table (mean/std/median over seeds)."""
    try:
        seed_list = [int(s) for s in seeds.split(",") if s.strip() != ""]
        row_list = [r.strip() for r in rows.split(",") if r.strip()] or None
        overrides = {}
        for item in sets:
            key, val = item.split("=", 1)
            from .harness import _coerce
            overrides[key.strip()] = _coerce(ExperimentConfig, key.strip(),
                                             val.strip())
        _, text = reproduce_tables(series, seed_list, base_dir,
                                   workers=workers, rows=row_list, **overrides)
        click.echo(text)
    except Exception as exc:
        _fail(exc)


@main.command("dump-figures")
@click.option("--run", "outdir", type=click.Path(exists=True), required=True)
def dump_figures(outdir):
    """Emit figure-feed CSVs (t, x[, y], hf, mf, lf, abs errors) from a run."""
    try:
        paths = dump_figure_feeds(outdir)
        for p in paths:
            click.echo(p)
    except Exception as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
