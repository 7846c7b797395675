"""Rendering tests on synthetic feeds plus the byte-identity contract."""

import os
import subprocess
import sys

import numpy as np
import pytest

from qmfig.io import FeedError, load_csv
from qmfig.render import FigureRequest, render


def write_csv(path, cols):
    names = list(cols)
    n = len(cols[names[0]])
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(str(cols[k][i]) for k in names) + "\n")


@pytest.fixture
def burgers_feed(tmp_path):
    rng = np.random.default_rng(0)
    times = np.linspace(0, 0.5, 6)
    xs = np.linspace(0, 1, 8)
    t, x = np.meshgrid(times, xs, indexing="ij")
    hf = np.sin(2 * np.pi * (x - 0.5 * t))
    mf = hf + 0.01 * rng.standard_normal(hf.shape)
    lf = hf + 0.1 * rng.standard_normal(hf.shape)
    path = tmp_path / "feed.csv"
    write_csv(path, {
        "t": t.ravel(), "x": x.ravel(), "hf": hf.ravel(), "mf": mf.ravel(),
        "lf": lf.ravel(), "abs_err_mf": np.abs(mf - hf).ravel(),
        "abs_err_lf": np.abs(lf - hf).ravel(),
    })
    return str(path)


@pytest.fixture
def cavity_feed(tmp_path):
    rng = np.random.default_rng(1)
    times = np.linspace(0, 3.0, 4)
    xs = np.linspace(0, 1, 6)
    t = np.repeat(times, 36)
    xg, yg = np.meshgrid(xs, xs, indexing="ij")
    x = np.tile(xg.ravel(), 4)
    y = np.tile(yg.ravel(), 4)
    hf = np.sin(np.pi * x) * np.cos(np.pi * y) * (1 + 0.1 * t)
    mf = hf + 0.01 * rng.standard_normal(hf.shape)
    lf = hf + 0.1 * rng.standard_normal(hf.shape)
    path = tmp_path / "feed_u.csv"
    write_csv(path, {
        "t": t, "x": x, "y": y, "hf": hf, "mf": mf, "lf": lf,
        "abs_err_mf": np.abs(mf - hf), "abs_err_lf": np.abs(lf - hf),
    })
    return str(path)


@pytest.fixture
def loss_trace(tmp_path):
    path = tmp_path / "loss_trace.csv"
    epochs = np.arange(200)
    stage = ["lf"] * 50 + ["mf"] * 150
    loss = np.exp(-epochs / 40.0) + 1e-6
    write_csv(path, {"epoch": epochs, "stage": stage, "loss": loss})
    return str(path)


class TestKinds:
    def test_spacetime(self, burgers_feed, tmp_path):
        out = str(tmp_path / "spacetime.png")
        render(FigureRequest("spacetime", [burgers_feed], out, cutoff=0.25))
        assert os.path.getsize(out) > 0

    def test_error_map_1d(self, burgers_feed, tmp_path):
        out = str(tmp_path / "err.png")
        render(FigureRequest("error-map", [burgers_feed], out, cutoff=0.25))
        assert os.path.getsize(out) > 0

    def test_error_map_2d(self, cavity_feed, tmp_path):
        out = str(tmp_path / "err2.png")
        render(FigureRequest("error-map", [cavity_feed], out, cutoff=2.0))
        assert os.path.getsize(out) > 0

    def test_snapshot_grid(self, cavity_feed, tmp_path):
        out = str(tmp_path / "snaps.png")
        render(FigureRequest("snapshot-grid", [cavity_feed], out, cutoff=2.0))
        assert os.path.getsize(out) > 0

    def test_loss_curve(self, loss_trace, tmp_path):
        out = str(tmp_path / "loss.png")
        render(FigureRequest("loss-curve", [loss_trace], out))
        assert os.path.getsize(out) > 0

    def test_table_render(self, tmp_path):
        path = tmp_path / "table.csv"
        write_csv(path, {"row": ["B1", "B4"], "metric": ["l2_full_u"] * 2,
                         "median": [0.078, 0.0615]})
        out = str(tmp_path / "table.png")
        render(FigureRequest("table-render", [str(path)], out))
        assert os.path.getsize(out) > 0


class TestValidation:
    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        write_csv(path, {"t": [0.0], "x": [0.0], "hf": [1.0]})
        with pytest.raises(FeedError, match="mf"):
            render(FigureRequest("spacetime", [str(path)],
                                 str(tmp_path / "o.png")))

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(FeedError):
            load_csv(str(path))
        with pytest.raises(FeedError):
            render(FigureRequest("spacetime", [str(path)],
                                 str(tmp_path / "o.png")))
        assert not (tmp_path / "o.png").exists()

    def test_unknown_kind(self, burgers_feed, tmp_path):
        with pytest.raises(FeedError):
            FigureRequest("pie-chart", [burgers_feed], str(tmp_path / "o.png"))

    def test_missing_input(self, tmp_path):
        with pytest.raises(FeedError):
            FigureRequest("spacetime", [str(tmp_path / "nope.csv")],
                          str(tmp_path / "o.png"))


class TestDeterminism:
    def test_byte_identical_rerender(self, burgers_feed, cavity_feed,
                                     loss_trace, tmp_path):
        jobs = [
            ("spacetime", [burgers_feed], 0.25),
            ("error-map", [burgers_feed], 0.25),
            ("snapshot-grid", [cavity_feed], 2.0),
            ("loss-curve", [loss_trace], None),
        ]
        for kind, inputs, cutoff in jobs:
            a = str(tmp_path / f"{kind}_a.png")
            b = str(tmp_path / f"{kind}_b.png")
            render(FigureRequest(kind, inputs, a, cutoff=cutoff))
            render(FigureRequest(kind, inputs, b, cutoff=cutoff))
            with open(a, "rb") as fa, open(b, "rb") as fb:
                assert fa.read() == fb.read(), f"{kind} is not byte-identical"


class TestCli:
    def test_render_via_cli(self, burgers_feed, tmp_path):
        out = str(tmp_path / "cli.png")
        proc = subprocess.run(
            [sys.executable, "-m", "qmfig.cli", "render", "--kind", "spacetime",
             "--in", burgers_feed, "--out", out, "--cutoff", "0.25"],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert os.path.exists(out)

    def test_cli_validation_exit_code(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        proc = subprocess.run(
            [sys.executable, "-m", "qmfig.cli", "render", "--kind", "spacetime",
             "--in", str(path), "--out", str(tmp_path / "o.png")],
            capture_output=True, text=True)
        assert proc.returncode == 2
