"""Tests for target-state generators and downstream observables."""

import numpy as np
import pytest

from aql.datasets import (
    IqpSpec,
    SpinHamiltonianSpec,
    _grid_tilings,
    _lanczos_ground,
    amplitude_encode,
    compact_encode,
    ghz,
    ground_state,
    hamiltonian_matrix,
    iqp_state,
    kernel_matrix,
    magnetization,
    random_circuit_state,
    random_circuit_state_2d,
    read_vector,
)
from aql.entanglement import entanglement_total
from aql.statevector import StateVector, pauli_expectation

SQRT5 = 2.23606797749979


# ---------------------------------------------------------------------------
# specs


class TestSpinHamiltonianSpec:
    def test_chain_edges(self):
        spec = SpinHamiltonianSpec.tfim_chain(4)
        assert spec.edges() == [(0, 1), (1, 2), (2, 3)]
        assert spec.num_sites == 4

    def test_grid_edges(self):
        spec = SpinHamiltonianSpec.xxz_grid(2, 3)
        assert set(spec.edges()) == {(0, 1), (1, 2), (3, 4), (4, 5),
                                     (0, 3), (1, 4), (2, 5)}
        assert spec.num_sites == 6

    def test_bad_model_rejected(self):
        with pytest.raises(ValueError, match="model"):
            SpinHamiltonianSpec("ising", (4,), (1.0, 1.0))

    def test_site_budget_enforced(self):
        with pytest.raises(ValueError, match="budget"):
            SpinHamiltonianSpec.tfim_chain(21)
        with pytest.raises(ValueError, match="budget"):
            SpinHamiltonianSpec.xxz_grid(3, 7)

    def test_bad_shape_rejected(self):
        with pytest.raises(ValueError):
            SpinHamiltonianSpec("tfim", (2, 2, 2), (1.0, 1.0))
        with pytest.raises(ValueError):
            SpinHamiltonianSpec("tfim", (0,), (1.0, 1.0))

    def test_nonfinite_coupling_rejected(self):
        with pytest.raises(ValueError, match="finite"):
            SpinHamiltonianSpec.tfim_chain(3, j=np.nan)


class TestIqpSpec:
    def test_normalizes_and_sorts_edges(self):
        spec = IqpSpec(4, ((2, 0), (3, 1)), (0.5, 0.25))
        assert spec.edges == ((0, 2), (1, 3))
        assert spec.angles == (0.5, 0.25)
        assert spec.angle_map() == {(0, 2): 0.5, (1, 3): 0.25}

    def test_degree(self):
        spec = IqpSpec(4, ((0, 1), (0, 2), (0, 3)), (0.1, 0.2, 0.3))
        assert spec.degree(0) == 3
        assert spec.degree(3) == 1
        assert spec.max_degree() == 3
        assert IqpSpec(2, (), ()).max_degree() == 0

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError, match="self-loop"):
            IqpSpec(3, ((1, 1),), (0.1,))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            IqpSpec(3, ((0, 3),), (0.1,))

    def test_duplicate_edges_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            IqpSpec(3, ((0, 1), (1, 0)), (0.1, 0.2))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="equal length"):
            IqpSpec(3, ((0, 1),), (0.1, 0.2))

    def test_from_angle_map(self):
        spec = IqpSpec.from_angle_map(3, {(1, 0): 0.7})
        assert spec.edges == ((0, 1),)
        assert spec.angles == (0.7,)


# ---------------------------------------------------------------------------
# ground states


class TestGroundState:
    def test_single_site_tfim_is_plus(self):
        state, energy = ground_state(SpinHamiltonianSpec.tfim_chain(1, g=0.7))
        assert energy == pytest.approx(-0.7, abs=1e-8)
        assert np.allclose(state.amplitudes, np.sqrt(0.5), atol=1e-7)

    def test_two_site_tfim_energy(self):
        state, energy = ground_state(SpinHamiltonianSpec.tfim_chain(2))
        assert energy == pytest.approx(-SQRT5, abs=1e-8)
        assert pauli_expectation(state, "X", 0) == pytest.approx(
            2.0 / SQRT5, abs=1e-8)

    @pytest.mark.parametrize("spec", [
        SpinHamiltonianSpec.tfim_chain(3, j=1.0, g=0.4),
        SpinHamiltonianSpec.tfim_chain(6, j=0.8, g=1.2),
        SpinHamiltonianSpec.tfim_chain(10),
        SpinHamiltonianSpec.tfim_grid(2, 3, j=1.1, g=0.9),
        SpinHamiltonianSpec.xxz_chain(2),
        SpinHamiltonianSpec.xxz_chain(5, jxy=1.0, jz=0.5),
        SpinHamiltonianSpec.xxz_chain(6),
        SpinHamiltonianSpec.xxz_grid(2, 2),
        SpinHamiltonianSpec.xxz_grid(2, 3),
        SpinHamiltonianSpec.xxz_grid(3, 3),
    ])
    def test_lanczos_matches_dense(self, spec):
        state, energy = ground_state(spec)
        h = hamiltonian_matrix(spec)
        vals, vecs = np.linalg.eigh(h)
        assert abs(energy - vals[0]) < 1e-8
        # degenerate ground spaces are compared through the projector
        degmask = vals < vals[0] + 1e-8
        proj = vecs[:, degmask]
        overlap = np.linalg.norm(proj.conj().T @ state.amplitudes) ** 2
        assert overlap >= 1.0 - 1e-10

    def test_residual_certificate(self):
        spec = SpinHamiltonianSpec.tfim_chain(8, j=1.0, g=1.3)
        state, energy = ground_state(spec)
        h = hamiltonian_matrix(spec)
        resid = np.linalg.norm(h @ state.amplitudes - energy * state.amplitudes)
        assert resid < 1e-8

    def test_ferromagnetic_degeneracy_deterministic(self):
        # the doublet splitting induced by the 1e-10 tie-break field is far
        # below machine precision at N=4, so the guarantee is determinism
        # plus membership in the span of |0...0> and |1...1>
        spec = SpinHamiltonianSpec.tfim_chain(4, j=1.0, g=0.0)
        a, ea = ground_state(spec)
        b, _ = ground_state(spec)
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert ea == pytest.approx(-3.0, abs=1e-8)
        in_span = abs(a.amplitudes[0]) ** 2 + abs(a.amplitudes[15]) ** 2
        assert in_span == pytest.approx(1.0, abs=1e-10)

    def test_sign_convention_deterministic(self):
        spec = SpinHamiltonianSpec.tfim_chain(7, j=1.0, g=0.9)
        a, ea = ground_state(spec)
        b, eb = ground_state(spec)
        assert ea == eb
        assert np.array_equal(a.amplitudes, b.amplitudes)
        k = int(np.argmax(np.abs(a.amplitudes)))
        assert a.amplitudes[k].real > 0

    def test_dense_path_cap(self):
        with pytest.raises(ValueError, match="dense"):
            hamiltonian_matrix(SpinHamiltonianSpec.tfim_chain(13))

    def test_nonconvergence_raises(self):
        rng = np.random.default_rng(5)
        m = rng.standard_normal((64, 64))
        m = m + m.T
        with pytest.raises(ValueError, match="Lanczos"):
            _lanczos_ground(lambda v: m @ v, 64, tol=1e-8, max_iter=3)

    def test_dense_matrix_is_hermitian(self):
        for spec in (SpinHamiltonianSpec.tfim_chain(4),
                     SpinHamiltonianSpec.xxz_grid(2, 2)):
            h = hamiltonian_matrix(spec)
            assert np.allclose(h, h.conj().T)


# ---------------------------------------------------------------------------
# circuit families


class TestGhz:
    def test_small_cases(self):
        assert np.allclose(ghz(1).amplitudes, np.sqrt(0.5))
        bell = ghz(2).amplitudes
        assert bell[0] == pytest.approx(np.sqrt(0.5))
        assert bell[3] == pytest.approx(np.sqrt(0.5))
        assert bell[1] == bell[2] == 0

    @pytest.mark.parametrize("n", [2, 5, 8])
    def test_entanglement_is_n(self, n):
        state = ghz(n)
        assert entanglement_total(state.amplitudes, n) == pytest.approx(
            n, abs=1e-9)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            ghz(0)


class TestRandomCircuitState:
    def test_w0_no_gates_is_zero_state(self):
        state = random_circuit_state(4, 0, seed=11)
        expect = np.zeros(16)
        expect[0] = 1.0
        assert np.array_equal(state.amplitudes, expect)

    def test_seed_determinism(self):
        a = random_circuit_state(6, 12, seed=42)
        b = random_circuit_state(6, 12, seed=42)
        assert np.array_equal(a.amplitudes, b.amplitudes)
        c = random_circuit_state(6, 12, seed=43)
        assert not np.allclose(a.amplitudes, c.amplitudes)

    def test_highly_entangled_at_n10_w40(self):
        vals = np.array([
            entanglement_total(random_circuit_state(10, 40, seed=s).amplitudes, 10)
            for s in range(50)
        ])
        assert np.median(vals) > 5.0
        assert int((vals > 5.0).sum()) >= 45

    def test_input_validation(self):
        with pytest.raises(ValueError):
            random_circuit_state(1, 3, seed=0)
        with pytest.raises(ValueError):
            random_circuit_state(4, -1, seed=0)

    def test_normalized(self):
        state = random_circuit_state(5, 10, seed=9)
        assert state.norm() == pytest.approx(1.0, abs=1e-12)


class TestRandomCircuitState2d:
    def test_1x2_tilings_degenerate_to_single_edge(self):
        tilings = _grid_tilings(1, 2)
        assert tilings[0] == [(0, 1)]
        assert tilings[1] == tilings[2] == tilings[3] == []

    def test_4x4_tilings_cover_all_grid_edges(self):
        tilings = _grid_tilings(4, 4)
        union = {e for t in tilings for e in t}
        assert union == set(SpinHamiltonianSpec.tfim_grid(4, 4).edges())
        # the four tilings are disjoint
        assert sum(len(t) for t in tilings) == len(union)

    def test_seed_determinism(self):
        a = random_circuit_state_2d(2, 3, seed=4)
        b = random_circuit_state_2d(2, 3, seed=4)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_entangles_the_grid(self):
        state = random_circuit_state_2d(3, 3, seed=2)
        assert entanglement_total(state.amplitudes, 9) > 0.1

    def test_input_validation(self):
        with pytest.raises(ValueError):
            random_circuit_state_2d(1, 1, seed=0)
        with pytest.raises(ValueError):
            random_circuit_state_2d(3, 7, seed=0)
        with pytest.raises(ValueError):
            random_circuit_state_2d(2, 2, depth=0, seed=0)


class TestIqpState:
    def test_no_edges_is_zero_state(self):
        state = iqp_state(IqpSpec(3, (), ()))
        assert abs(state.amplitudes[0] - 1.0) < 1e-12

    def test_zero_angles_is_zero_state(self):
        state = iqp_state(IqpSpec(3, ((0, 1), (1, 2)), (0.0, 0.0)))
        assert abs(state.amplitudes[0] - 1.0) < 1e-12

    def test_single_edge_entropy(self):
        state = iqp_state(IqpSpec(3, ((0, 1),), (np.pi / 4,)))
        per_qubit = -np.log2((1.0 + np.cos(np.pi / 4) ** 2) / 2.0)
        assert entanglement_total(state.amplitudes, 3) == pytest.approx(
            2.0 * per_qubit, abs=1e-10)
        assert per_qubit == pytest.approx(0.4150374992788438, abs=1e-12)


# ---------------------------------------------------------------------------
# encodings


class TestEncodings:
    def test_amplitude_basis_vector(self):
        state = amplitude_encode(np.array([1.0, 0.0, 0.0, 0.0]))
        assert state.num_qubits == 2
        assert abs(state.amplitudes[0] - 1.0) < 1e-12

    def test_amplitude_plus(self):
        state = amplitude_encode(np.array([1.0, 1.0]))
        assert np.allclose(state.amplitudes, np.sqrt(0.5))

    def test_amplitude_pads_to_power_of_two(self):
        state = amplitude_encode(np.array([3.0, 0.0, 4.0]))
        assert state.num_qubits == 2
        assert state.amplitudes[3] == 0.0
        assert state.amplitudes[0] == pytest.approx(0.6)
        assert state.amplitudes[2] == pytest.approx(0.8)

    def test_amplitude_accepts_complex(self):
        state = amplitude_encode(np.array([1.0j, 1.0]))
        assert state.norm() == pytest.approx(1.0)

    def test_amplitude_rejects_zero_vector(self):
        with pytest.raises(ValueError, match="zero"):
            amplitude_encode(np.zeros(4))

    def test_compact_example(self):
        state = compact_encode(np.array([1.0, 0, 0, 0, 1.0, 0, 0, 0]))
        assert state.num_qubits == 2
        assert state.amplitudes[0] == pytest.approx((1 + 1j) / np.sqrt(2))
        assert np.allclose(state.amplitudes[1:], 0.0)

    def test_compact_rejects_bad_lengths(self):
        with pytest.raises(ValueError):
            compact_encode(np.ones(6))
        with pytest.raises(ValueError):
            compact_encode(np.ones(2))

    def test_compact_rejects_zero_vector(self):
        with pytest.raises(ValueError, match="zero"):
            compact_encode(np.zeros(8))

    def test_read_vector_round_trip(self, tmp_path):
        v = np.array([1.5, -2.25, 0.75])
        raw = tmp_path / "v.f64"
        v.astype("<f8").tofile(raw)
        assert np.array_equal(read_vector(str(raw)), v)
        csv = tmp_path / "v.csv"
        csv.write_text("1.5\n-2.25\n0.75\n")
        assert np.array_equal(read_vector(str(csv)), v)


# ---------------------------------------------------------------------------
# observables


class TestMagnetization:
    def test_plus_state_is_one(self):
        state = StateVector.normalized(np.ones(8))
        assert magnetization(state) == pytest.approx(1.0, abs=1e-12)

    def test_zero_state_is_zero(self):
        assert magnetization(StateVector.zero(3)) == pytest.approx(0.0, abs=1e-12)

    def test_tfim_paramagnetic_side(self):
        state, _ = ground_state(SpinHamiltonianSpec.tfim_chain(10, j=1.0, g=2.0))
        assert magnetization(state) > 0.9

    def test_monotone_in_transverse_field(self):
        mags = []
        for g in (0.5, 0.8, 1.0, 1.25, 2.0):
            state, _ = ground_state(SpinHamiltonianSpec.tfim_chain(10, j=1.0, g=g))
            mags.append(magnetization(state))
        assert all(b > a for a, b in zip(mags, mags[1:]))


class TestKernelMatrix:
    def test_identical_states_all_ones(self):
        g = ghz(3)
        assert np.allclose(kernel_matrix([g, g, g]), 1.0)

    def test_orthogonal_pair_is_identity(self):
        a = StateVector.zero(2)
        amps = np.zeros(4, dtype=complex)
        amps[3] = 1.0
        b = StateVector(2, amps)
        assert np.allclose(kernel_matrix([a, b]), np.eye(2))

    def test_random_states_gram_properties(self, rng):
        states = []
        for _ in range(20):
            v = rng.standard_normal(16) + 1j * rng.standard_normal(16)
            states.append(StateVector.normalized(v))
        k = kernel_matrix(states)
        assert np.allclose(k, k.T)
        assert np.allclose(np.diag(k), 1.0)
        assert np.all(k >= 0.0) and np.all(k <= 1.0 + 1e-12)
        assert np.linalg.eigvalsh(k).min() > -1e-10
