"""Minimal complex statevector emulator for the lattice-Boltzmann circuits.

Registers are ordered ancilla (most significant) | link | lattice (least
significant): basis index = (anc << (n_link + n_lattice)) | (link << n_lattice) | lat.
In 2D the lattice register splits evenly per axis, row-major: lat = y * 2^mx + x.
States are generally sub-normalized; normalization factors are tracked by the
caller and divided out at readout.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_SQRT2_INV = 1.0 / np.sqrt(2.0)

MAX_QUBITS = 24


@dataclass(frozen=True)
class RegisterLayout:
    n_ancilla: int
    n_link: int
    n_lattice: int

    def __post_init__(self):
        if min(self.n_ancilla, self.n_link, self.n_lattice) < 0:
            raise ConfigError("register sizes must be non-negative")
        if self.total_qubits > MAX_QUBITS:
            raise ConfigError(f"{self.total_qubits} qubits exceeds the "
                              f"{MAX_QUBITS}-qubit desk-scale cap")

    @property
    def total_qubits(self) -> int:
        return self.n_ancilla + self.n_link + self.n_lattice

    @property
    def n_sites(self) -> int:
        return 1 << self.n_lattice

    @property
    def dim(self) -> int:
        return 1 << self.total_qubits


class Statevector:
    """Complex amplitudes over a RegisterLayout. Exclusively owned while mutated."""

    def __init__(self, amplitudes: np.ndarray, layout: RegisterLayout):
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (layout.dim,):
            raise ConfigError(f"amplitude length {amplitudes.shape} != {layout.dim}")
        self.amplitudes = amplitudes
        self.layout = layout

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.layout)


@dataclass
class DiagonalOp:
    """Diagonal operator over the (link, lattice) index space."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.complex128)
        if not np.all(np.isfinite(self.entries)):
            raise ConfigError("diagonal entries must be finite")


def prepare_amplitudes(layout: RegisterLayout, sector_values: dict):
    """Load real arrays into (ancilla=0, link sector) blocks of a fresh state.

    sector_values maps link patterns to per-site arrays (length <= n_sites;
    shorter arrays fill the low lattice indices, the padding stays zero).
    Returns (state, norm) where norm is the normalization scalar divided out
    of the amplitudes, so macroscopic readout can invert it.
    """
    amps = np.zeros(layout.dim, dtype=np.complex128)
    block = amps.reshape(1 << layout.n_ancilla, 1 << layout.n_link, layout.n_sites)
    for pattern, values in sector_values.items():
        if not 0 <= pattern < (1 << layout.n_link):
            raise ConfigError(f"link pattern {pattern} out of range")
        values = np.asarray(values, dtype=np.float64)
        if values.size > layout.n_sites:
            raise ConfigError(f"{values.size} values exceed {layout.n_sites} lattice sites")
        block[0, pattern, :values.size] = values
    norm = float(np.linalg.norm(amps))
    if norm == 0.0:
        raise ConfigError("cannot normalize an all-zero amplitude input")
    amps /= norm
    return Statevector(amps, layout), norm


def hadamard(state: Statevector, qubit_index: int) -> Statevector:
    """Single-qubit Hadamard applied in place; qubit 0 is the least significant."""
    n = state.layout.total_qubits
    if not 0 <= qubit_index < n:
        raise ConfigError(f"qubit index {qubit_index} out of range for {n} qubits")
    view = state.amplitudes.reshape(1 << (n - qubit_index - 1), 2, 1 << qubit_index)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = (a + b) * _SQRT2_INV
    view[:, 1, :] = (a - b) * _SQRT2_INV
    return state


def apply_controlled_diagonal(state: Statevector, d: DiagonalOp,
                              ancilla_value: int) -> Statevector:
    """Multiply the chosen ancilla block by a (link, lattice) diagonal, in place."""
    lay = state.layout
    if lay.n_ancilla != 1:
        raise ConfigError("controlled diagonal expects a single-ancilla layout")
    if ancilla_value not in (0, 1):
        raise ConfigError("ancilla_value must be 0 or 1")
    if d.entries.shape != (1 << (lay.n_link + lay.n_lattice),):
        raise ConfigError(f"diagonal length {d.entries.shape} does not match "
                          f"link+lattice dimension {1 << (lay.n_link + lay.n_lattice)}")
    block = state.amplitudes.reshape(2, -1)
    block[ancilla_value] *= d.entries
    return state


def apply_controlled_shift(state: Statevector, link_pattern: int, axis: int,
                           direction: int, two_dim: bool = False) -> Statevector:
    """Cyclically shift the lattice index by +-1 along an axis for the
    amplitudes whose link register equals link_pattern."""
    lay = state.layout
    if not 0 <= link_pattern < (1 << lay.n_link):
        raise ConfigError(f"link pattern {link_pattern} out of range")
    if direction not in (1, -1):
        raise ConfigError("direction must be +1 or -1")
    if two_dim:
        if lay.n_lattice % 2 != 0:
            raise ConfigError("2D shift needs an even lattice register")
        half = lay.n_lattice // 2
        shape = (1 << lay.n_ancilla, 1 << lay.n_link, 1 << half, 1 << half)
        if axis not in (0, 1):
            raise ConfigError("axis must be 0 (x) or 1 (y) in 2D")
        # lat = y * 2^mx + x: x is the last reshaped axis, y the one before
        roll_axis = 3 if axis == 0 else 2
    else:
        if axis != 0:
            raise ConfigError("axis must be 0 in 1D")
        shape = (1 << lay.n_ancilla, 1 << lay.n_link, lay.n_sites)
        roll_axis = 2
    view = state.amplitudes.reshape(shape)
    sel = view[:, link_pattern]
    view[:, link_pattern] = np.roll(sel, direction, axis=roll_axis - 1)
    return state


def read_sector(state: Statevector, ancilla_value: int, link_pattern: int) -> np.ndarray:
    """Real parts of the selected (ancilla, link) sector, no renormalization."""
    lay = state.layout
    view = state.amplitudes.reshape(1 << lay.n_ancilla, 1 << lay.n_link, lay.n_sites)
    return np.real(view[ancilla_value, link_pattern]).copy()


def dump_amplitudes(state: Statevector, path) -> None:
    """Debug CSV dump: index, re, im."""
    with open(path, "w") as fh:
        fh.write("index,re,im\n")
        for i, a in enumerate(state.amplitudes):
            fh.write(f"{i},{a.real:.17g},{a.imag:.17g}\n")
