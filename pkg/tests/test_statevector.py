"""Statevector ops against explicit dense-matrix oracles."""

import numpy as np
import pytest

from qmflow.errors import ConfigError
from qmflow.statevector import (DiagonalOp, RegisterLayout, Statevector,
                                apply_controlled_diagonal, apply_controlled_shift,
                                hadamard, prepare_amplitudes, read_sector)

H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
I2 = np.eye(2, dtype=complex)


def dense_hadamard(n_qubits, q):
    """Full 2^n x 2^n matrix for H on qubit q (qubit 0 least significant)."""
    mats = [I2] * n_qubits
    mats[n_qubits - 1 - q] = H1
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_controlled_diagonal(layout, entries, ancilla_value):
    diag = np.ones(layout.dim, dtype=complex)
    block = diag.reshape(2, -1)
    block[ancilla_value] = entries
    return np.diag(diag.reshape(-1))


def dense_controlled_shift(layout, pattern, axis, direction, two_dim):
    dim = layout.dim
    mat = np.zeros((dim, dim), dtype=complex)
    mx = layout.n_lattice // 2 if two_dim else layout.n_lattice
    for idx in range(dim):
        lat = idx & (layout.n_sites - 1)
        link = (idx >> layout.n_lattice) & ((1 << layout.n_link) - 1)
        if link != pattern:
            mat[idx, idx] = 1.0
            continue
        if two_dim:
            x, y = lat & ((1 << mx) - 1), lat >> mx
            if axis == 0:
                x = (x + direction) % (1 << mx)
            else:
                y = (y + direction) % (1 << mx)
            new_lat = (y << mx) | x
        else:
            new_lat = (lat + direction) % layout.n_sites
        new_idx = (idx - lat) + new_lat
        mat[new_idx, idx] = 1.0
    return mat


def random_state(layout, rng):
    amps = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    return Statevector(amps, layout)


def small_layouts():
    """All register splits with <= 4 total qubits and at least one lattice qubit."""
    out = []
    for na in (0, 1):
        for nl in (0, 1, 2):
            for nlat in (1, 2):
                if na + nl + nlat <= 4:
                    out.append(RegisterLayout(na, nl, nlat))
    return out


class TestPrepare:
    def test_basis_state(self):
        lay = RegisterLayout(1, 2, 2)
        state, norm = prepare_amplitudes(lay, {0: np.array([1.0, 0, 0, 0])})
        assert norm == 1.0
        assert state.amplitudes[0] == 1.0
        assert np.count_nonzero(state.amplitudes) == 1

    def test_replicated_round_trip(self):
        lay = RegisterLayout(1, 2, 4)
        u = np.linspace(0.1, 0.9, 16)
        state, norm = prepare_amplitudes(lay, {k: u for k in range(3)})
        for k in range(3):
            np.testing.assert_allclose(read_sector(state, 0, k) * norm, u, atol=1e-14)

    def test_random_round_trip(self):
        rng = np.random.default_rng(7)
        lay = RegisterLayout(0, 1, 4)
        for _ in range(20):
            vals = rng.standard_normal(16)
            state, norm = prepare_amplitudes(lay, {1: vals})
            np.testing.assert_allclose(read_sector(state, 0, 1) * norm, vals, atol=1e-14)

    def test_all_zero_rejected(self):
        lay = RegisterLayout(1, 1, 2)
        with pytest.raises(ConfigError):
            prepare_amplitudes(lay, {0: np.zeros(4)})


class TestHadamard:
    def test_plus_state(self):
        lay = RegisterLayout(0, 0, 1)
        state = Statevector(np.array([1.0, 0.0]), lay)
        hadamard(state, 0)
        np.testing.assert_allclose(state.amplitudes,
                                   [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-15)

    def test_involution(self):
        rng = np.random.default_rng(3)
        lay = RegisterLayout(1, 1, 1)
        state = random_state(lay, rng)
        ref = state.amplitudes.copy()
        for q in range(3):
            hadamard(hadamard(state, q), q)
        np.testing.assert_allclose(state.amplitudes, ref, atol=1e-14)

    def test_out_of_range(self):
        lay = RegisterLayout(0, 0, 2)
        state = Statevector(np.zeros(4) + 1.0, lay)
        with pytest.raises(ConfigError):
            hadamard(state, 5)


class TestControlledDiagonal:
    def test_identity_entries(self):
        rng = np.random.default_rng(5)
        lay = RegisterLayout(1, 1, 2)
        state = random_state(lay, rng)
        ref = state.amplitudes.copy()
        apply_controlled_diagonal(state, DiagonalOp(np.ones(8)), 1)
        np.testing.assert_array_equal(state.amplitudes, ref)

    def test_control_not_satisfied(self):
        lay = RegisterLayout(1, 1, 2)
        amps = np.zeros(16, dtype=complex)
        amps[:8] = np.arange(1, 9)  # ancilla = 0 block only
        state = Statevector(amps.copy(), lay)
        d = DiagonalOp(np.exp(1j * np.linspace(0, 1, 8)))
        apply_controlled_diagonal(state, d, 1)
        np.testing.assert_array_equal(state.amplitudes, amps)

    def test_dimension_mismatch(self):
        lay = RegisterLayout(1, 1, 2)
        state = Statevector(np.ones(16, dtype=complex), lay)
        with pytest.raises(ConfigError):
            apply_controlled_diagonal(state, DiagonalOp(np.ones(4)), 0)


class TestControlledShift:
    def test_basis_shift(self):
        lay = RegisterLayout(0, 1, 2)
        amps = np.zeros(8, dtype=complex)
        amps[4 + 3] = 1.0  # link=1, site 3
        state = Statevector(amps, lay)
        apply_controlled_shift(state, 1, 0, 1)
        assert state.amplitudes[4 + 0] == 1.0  # site wraps 3 -> 0

    def test_inverse_pair(self):
        rng = np.random.default_rng(11)
        lay = RegisterLayout(1, 2, 4)
        state = random_state(lay, rng)
        ref = state.amplitudes.copy()
        apply_controlled_shift(state, 2, 0, 1)
        apply_controlled_shift(state, 2, 0, -1)
        np.testing.assert_allclose(state.amplitudes, ref, atol=1e-14)

    def test_invalid_pattern(self):
        lay = RegisterLayout(0, 1, 2)
        state = Statevector(np.ones(8, dtype=complex), lay)
        with pytest.raises(ConfigError):
            apply_controlled_shift(state, 5, 0, 1)


class TestReadSector:
    def test_unpopulated_sector_zero(self):
        lay = RegisterLayout(1, 2, 2)
        state, _ = prepare_amplitudes(lay, {0: np.ones(4)})
        assert np.all(read_sector(state, 0, 3) == 0.0)
        assert np.all(read_sector(state, 1, 0) == 0.0)


class TestDenseOracles:
    """Every op on all <= 4-qubit layouts vs explicit dense matrices (P8 core)."""

    def test_hadamard_matches_dense(self):
        rng = np.random.default_rng(21)
        for lay in small_layouts():
            for q in range(lay.total_qubits):
                state = random_state(lay, rng)
                expect = dense_hadamard(lay.total_qubits, q) @ state.amplitudes
                hadamard(state, q)
                np.testing.assert_allclose(state.amplitudes, expect, atol=1e-12)

    def test_diagonal_matches_dense(self):
        rng = np.random.default_rng(22)
        for lay in small_layouts():
            if lay.n_ancilla != 1:
                continue
            for anc in (0, 1):
                entries = rng.standard_normal(1 << (lay.n_link + lay.n_lattice)) \
                    + 1j * rng.standard_normal(1 << (lay.n_link + lay.n_lattice))
                state = random_state(lay, rng)
                expect = dense_controlled_diagonal(lay, entries, anc) @ state.amplitudes
                apply_controlled_diagonal(state, DiagonalOp(entries), anc)
                np.testing.assert_allclose(state.amplitudes, expect, atol=1e-12)

    def test_shift_matches_dense(self):
        rng = np.random.default_rng(23)
        for lay in small_layouts():
            two_dim_options = [False] + ([True] if lay.n_lattice % 2 == 0 else [])
            for two_dim in two_dim_options:
                axes = (0, 1) if two_dim else (0,)
                for pattern in range(1 << lay.n_link):
                    for axis in axes:
                        for direction in (1, -1):
                            state = random_state(lay, rng)
                            mat = dense_controlled_shift(lay, pattern, axis,
                                                         direction, two_dim)
                            expect = mat @ state.amplitudes
                            apply_controlled_shift(state, pattern, axis,
                                                   direction, two_dim)
                            np.testing.assert_allclose(state.amplitudes, expect,
                                                       atol=1e-12)


class TestProperties:
    def test_unitarity(self):
        rng = np.random.default_rng(31)
        lay = RegisterLayout(1, 2, 3)
        for _ in range(25):
            state = random_state(lay, rng)
            n0 = state.norm()
            hadamard(state, int(rng.integers(lay.total_qubits)))
            apply_controlled_shift(state, int(rng.integers(4)), 0,
                                   int(rng.choice([1, -1])))
            assert abs(state.norm() - n0) <= 1e-13 * n0

    def test_unimodular_diagonal_preserves_norm(self):
        rng = np.random.default_rng(32)
        lay = RegisterLayout(1, 1, 3)
        d_uni = DiagonalOp(np.exp(1j * rng.uniform(0, 2 * np.pi, 16)))
        state = random_state(lay, rng)
        n0 = state.norm()
        apply_controlled_diagonal(state, d_uni, 0)
        assert abs(state.norm() - n0) <= 1e-13 * n0
        # strictly contracting entries never increase norm
        d_sub = DiagonalOp(rng.uniform(-0.9, 0.9, 16).astype(complex))
        n1 = state.norm()
        apply_controlled_diagonal(state, d_sub, 0)
        assert state.norm() < n1

    def test_linearity(self):
        rng = np.random.default_rng(33)
        lay = RegisterLayout(1, 1, 2)
        for _ in range(10):
            s1, s2 = random_state(lay, rng), random_state(lay, rng)
            a, b = rng.standard_normal(2)
            combo = Statevector(a * s1.amplitudes + b * s2.amplitudes, lay)
            q = int(rng.integers(lay.total_qubits))
            hadamard(combo, q)
            hadamard(s1, q)
            hadamard(s2, q)
            np.testing.assert_allclose(
                combo.amplitudes, a * s1.amplitudes + b * s2.amplitudes, atol=1e-12)
