"""Plain-CSV artifact I/O with JSON sidecars.

All floats are printed with 17 significant digits so values round-trip
exactly through the file format.
"""

import json
import os

import numpy as np

from .errors import ConfigError

FLOAT_FMT = "%.17g"


def write_table(path, columns: dict) -> None:
    """Write named columns (1D arrays or string lists) as CSV."""
    names = list(columns)
    arrays = [columns[n] for n in names]
    n = len(arrays[0])
    for name, arr in zip(names, arrays):
        if len(arr) != n:
            raise ConfigError(f"column {name} length {len(arr)} != {n}")
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            cells = []
            for arr in arrays:
                v = arr[i]
                if isinstance(v, (float, np.floating)):
                    cells.append(FLOAT_FMT % v)
                else:
                    cells.append(str(v))
            fh.write(",".join(cells) + "\n")


def read_table(path) -> dict:
    """Read a CSV written by write_table; numeric columns become float arrays."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ConfigError(f"{path} is empty")
        names = header.split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(names):
        col = [r[j] for r in rows]
        try:
            out[name] = np.array([float(c) for c in col])
        except ValueError:
            out[name] = col
    return out


def write_sidecar(path, meta: dict) -> None:
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def read_sidecar(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def export_run_snapshots(path_csv, coords: dict, meta: dict) -> None:
    """Solver snapshot export: one CSV per run with (t, x[, y], value...)
    columns plus a JSON sidecar carrying grid metadata, parameters, and
    solver provenance."""
    write_table(path_csv, coords)
    write_sidecar(os.path.splitext(path_csv)[0] + ".json", meta)
