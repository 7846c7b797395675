"""Grids and time-stamped scalar fields for the 1D and 2D solvers."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1D grid. Periodic grids place point j at j*spacing (no duplicate
    endpoint); non-periodic grids include both endpoints."""

    n_points: int
    length: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        if self.n_points < 2:
            raise ConfigError(f"Grid1D needs at least 2 points, got {self.n_points}")
        if self.length <= 0:
            raise ConfigError(f"Grid1D length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        if self.periodic:
            return self.length / self.n_points
        return self.length / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing


@dataclass(frozen=True)
class Grid2D:
    """Uniform n x n grid over [0,1]^2 with boundary nodes included."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError(f"Grid2D needs n >= 3, got {self.n}")

    @property
    def spacing(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)


@dataclass
class Field:
    """Real-valued field on a grid at a simulation time.

    ``values`` is indexed [i] in 1D and [i, j] = [x-index, y-index] in 2D.
    """

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("Field values must be finite")

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.time)


def check_shape(f: Field, grid) -> None:
    if isinstance(grid, Grid1D):
        expect = (grid.n_points,)
    else:
        expect = (grid.n, grid.n)
    if f.values.shape != expect:
        raise ConfigError(f"field shape {f.values.shape} does not match grid {expect}")
