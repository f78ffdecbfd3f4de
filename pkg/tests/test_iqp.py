"""Diagonal-phase (IQP) loader tests.

Oracles: dense statevector simulation of the residual state for <X_n>, the
package's own entanglement_measure for the closed-form per-qubit entropy,
and full loader round trips |0..0> -> circuit -> fidelity against the
generating state.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from aql._seeding import substream
from aql.datasets import IqpSpec, iqp_state
from aql.entanglement import entanglement_measure
from aql.iqp import (IqpGrid, MAX_SHOT_DEGREE, SHOT_CALIBRATION_C,
                     iqp_approx_load, iqp_exact_load, iqp_residual_state,
                     iqp_shot_recover, iqp_x_formula)
from aql.statevector import StateVector, apply_circuit, fidelity, rdm1


def random_spec(rng, n, max_edges, angle_fn):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    m = int(rng.integers(1, max_edges + 1))
    edges = tuple(sorted(pairs[:m]))
    return IqpSpec(n, edges, tuple(angle_fn(rng) for _ in edges))


def grid_angle(rng, K):
    a = int(rng.integers(1, 2 * K + 1)) * int(rng.choice([-1, 1]))
    return a * (math.pi / (2 * K + 1))


def loader_infidelity(circ, target):
    out = apply_circuit(StateVector.zero(target.num_qubits), circ)
    return 1.0 - fidelity(out, target)


# ---------------------------------------------------------------------------
# angle grid

class TestIqpGrid:
    def test_k1_values(self):
        vals = IqpGrid(1).values
        assert len(vals) == 5
        step = math.pi / 3
        assert np.allclose(vals, [-2 * step, -step, 0.0, step, 2 * step])

    @given(st.integers(min_value=1, max_value=25))
    def test_symmetric_and_inside_pi(self, K):
        vals = IqpGrid(K).values
        assert len(vals) == 4 * K + 1
        assert np.allclose(vals, -vals[::-1])
        assert np.all(np.abs(vals) < math.pi)

    def test_validation(self):
        with pytest.raises(ValueError):
            IqpGrid(0)
        with pytest.raises(ValueError):
            IqpGrid(-2)


# ---------------------------------------------------------------------------
# product formula

class TestXFormula:
    def test_against_simulated_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(2, 7))
            spec = random_spec(rng, n, min(8, n * (n - 1) // 2),
                               lambda r: float(r.uniform(-math.pi, math.pi)))
            res = iqp_residual_state(spec)
            for q in range(n):
                rho = rdm1(res, q)
                assert abs(iqp_x_formula(spec, q)
                           - float((rho[0, 1] + rho[1, 0]).real)) < 1e-12
                # the residual Bloch vector has no y or z component
                assert abs(float((rho[0, 1] - rho[1, 0]).imag)) < 1e-12
                assert abs(float(rho[0, 0].real - rho[1, 1].real)) < 1e-12

    def test_entropy_closed_form(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            n = int(rng.integers(2, 7))
            spec = random_spec(rng, n, 6,
                               lambda r: float(r.uniform(-math.pi, math.pi)))
            rep = entanglement_measure(iqp_residual_state(spec))
            for q in range(n):
                x = iqp_x_formula(spec, q)
                assert abs(rep.per_qubit[q]
                           + math.log2((1.0 + x * x) / 2.0)) < 1e-10

    def test_pi4_edges_give_sqrt2_powers(self):
        spec = IqpSpec(4, ((0, 1), (0, 2), (0, 3)), (math.pi / 4,) * 3)
        xs = [iqp_x_formula(spec, q) for q in range(4)]
        assert abs(xs[0] - (math.sqrt(2) / 2) ** 3) < 1e-15
        for q in (1, 2, 3):
            assert abs(xs[q] - math.sqrt(2) / 2) < 1e-15

    def test_qubit_range_checked(self):
        spec = IqpSpec(3, ((0, 1),), (0.3,))
        with pytest.raises(ValueError):
            iqp_x_formula(spec, 3)


# ---------------------------------------------------------------------------
# exact grid loading

class TestExactLoad:
    def test_single_edge_pi5_k2(self):
        spec = IqpSpec(2, ((0, 1),), (math.pi / 5,))
        target = iqp_state(spec)
        circ, iters = iqp_exact_load(target, 2)
        assert iters == 1
        assert loader_infidelity(circ, target) < 1e-12
        # the loader carries the cancelling angle, adjointed back to +pi/5
        rzz = [op.param for op in circ.ops if op.kind == "RZZ"]
        assert rzz == pytest.approx([math.pi / 5])

    def test_empty_edge_set(self):
        target = iqp_state(IqpSpec(3, (), ()))
        circ, iters = iqp_exact_load(target, 1)
        assert iters == 0
        assert loader_infidelity(circ, target) < 1e-12

    def test_random_grid_instances(self):
        rng = np.random.default_rng(13)
        for _ in range(25):
            n = int(rng.integers(2, 8))
            K = int(rng.integers(1, 4))
            spec = random_spec(rng, n, min(8, n * (n - 1) // 2),
                               lambda r: grid_angle(r, K))
            target = iqp_state(spec)
            circ, iters = iqp_exact_load(target, K)
            assert iters <= len(spec.edges)
            assert loader_infidelity(circ, target) < 1e-9

    def test_iterations_match_nonzero_edges(self):
        # one iteration per edge: a 4-cycle needs exactly 4
        K = 2
        w = math.pi / 5
        spec = IqpSpec(4, ((0, 1), (1, 2), (2, 3), (0, 3)), (w, w, -w, 2 * w))
        target = iqp_state(spec)
        _, iters = iqp_exact_load(target, K)
        assert iters == 4

    def test_non_iqp_target_raises(self):
        rng = np.random.default_rng(14)
        bad = oracles.random_state(rng, 3)
        with pytest.raises(ValueError, match="grid"):
            iqp_exact_load(StateVector(3, bad), 1)

    def test_off_grid_angle_raises(self):
        # w = pi/5 lives on the K=2 grid but not on K=1
        spec = IqpSpec(2, ((0, 1),), (math.pi / 5,))
        with pytest.raises(ValueError, match="grid"):
            iqp_exact_load(iqp_state(spec), 1)

    def test_single_qubit_rejected(self):
        one = StateVector(1, np.array([1.0, 0.0], dtype=complex))
        with pytest.raises(ValueError, match="2 qubits"):
            iqp_exact_load(one, 1)


# ---------------------------------------------------------------------------
# approximate loading of arbitrary angles

class TestApproxLoad:
    def test_entanglement_hits_eps(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            n = int(rng.integers(3, 6))
            spec = random_spec(rng, n, n,  # ring-ish density, D small
                               lambda r: float(r.uniform(-math.pi, math.pi)))
            d = spec.max_degree()
            target = iqp_state(spec)
            circ, s_final = iqp_approx_load(target, d, 0.01)
            assert s_final <= 0.01
            # Step II then converts S to infidelity at most f2(S) ~ S/2
            assert loader_infidelity(circ, target) < 0.01

    def test_tighter_eps_gives_lower_s(self):
        rng = np.random.default_rng(16)
        spec = random_spec(rng, 4, 4,
                           lambda r: float(r.uniform(-math.pi, math.pi)))
        target = iqp_state(spec)
        _, s_loose = iqp_approx_load(target, spec.max_degree(), 0.1)
        _, s_tight = iqp_approx_load(target, spec.max_degree(), 1e-4)
        assert s_tight < s_loose or s_tight < 1e-4

    def test_grid_instance_recovered_exactly(self):
        # angles on the implied grid are cancelled exactly, not just to eps:
        # eps = 1.3 makes K = ceil((pi/2) sqrt(2/1.3)) = 2, whose grid
        # {a pi/5} contains the edge angle
        spec = IqpSpec(2, ((0, 1),), (math.pi / 5,))
        target = iqp_state(spec)
        assert math.ceil((math.pi / 2) * math.sqrt(1 * 2 / 1.3)) == 2
        _, s_final = iqp_approx_load(target, 1, 1.3)
        assert s_final < 1e-12

    def test_one_block_per_pair(self):
        rng = np.random.default_rng(17)
        spec = random_spec(rng, 4, 6,
                           lambda r: float(r.uniform(-math.pi, math.pi)))
        circ, _ = iqp_approx_load(iqp_state(spec), spec.max_degree(), 1e-3)
        pairs = [op.qubits for op in circ.ops if op.kind == "RZZ"]
        assert len(pairs) == len(set(pairs))
        assert len(pairs) <= 6

    def test_validation(self):
        target = iqp_state(IqpSpec(2, ((0, 1),), (0.5,)))
        with pytest.raises(ValueError, match="degree"):
            iqp_approx_load(target, -1, 0.1)
        with pytest.raises(ValueError, match="eps"):
            iqp_approx_load(target, 1, 0.0)
        with pytest.raises(ValueError, match="delta"):
            iqp_approx_load(target, 1, 0.1, delta=1.0)


# ---------------------------------------------------------------------------
# shot-mode edge recovery

class TestShotRecover:
    W = math.pi / 4  # the pi/8-exponent convention in RZZ units

    def test_single_edge_budget_and_recovery(self):
        spec = IqpSpec(2, ((0, 1),), (self.W,))
        target = iqp_state(spec)
        n, e_max, d = 2, 1, 1
        m = math.ceil(SHOT_CALIBRATION_C * 2 ** d
                      * math.log(n * n * e_max / 0.05))
        fails = 0
        for t in range(200):
            rng = substream(t, "shots")
            try:
                edges, circ, shots = iqp_shot_recover(target, d, 0.05, rng)
            except RuntimeError:
                fails += 1
                continue
            # |E| accepting scans plus one clean pass, 4 estimates per test
            assert shots <= 4 * m * e_max * (len(spec.edges) + 1)
            if edges != spec.edges or loader_infidelity(circ, target) >= 1e-9:
                fails += 1
        assert fails <= 10  # empirical success >= 1 - delta at delta = 0.05

    def test_star_graph_recovered(self):
        spec = IqpSpec(4, ((0, 1), (0, 2), (0, 3)), (self.W,) * 3)
        target = iqp_state(spec)
        edges, circ, _ = iqp_shot_recover(target, 3, 0.05,
                                          substream(5, "shots"))
        assert edges == spec.edges
        assert loader_infidelity(circ, target) < 1e-9

    def test_empty_graph_accepts_nothing(self):
        target = iqp_state(IqpSpec(3, (), ()))
        edges, circ, shots = iqp_shot_recover(target, 2, 0.05,
                                              substream(6, "shots"))
        assert edges == ()
        assert loader_infidelity(circ, target) < 1e-9
        # exactly one clean scan over all 3 pairs
        d, n, e_max = 2, 3, 3
        m = math.ceil(SHOT_CALIBRATION_C * 2 ** d
                      * math.log(n * n * e_max / 0.05))
        assert shots == 4 * m * e_max

    def test_deterministic_for_fixed_stream(self):
        spec = IqpSpec(5, ((0, 2), (1, 4), (2, 3)), (self.W,) * 3)
        target = iqp_state(spec)
        a = iqp_shot_recover(target, 2, 0.05, substream(7, "shots"))
        b = iqp_shot_recover(target, 2, 0.05, substream(7, "shots"))
        assert a[0] == b[0] and a[2] == b[2]

    def test_validation(self):
        target = iqp_state(IqpSpec(2, ((0, 1),), (W := self.W,)))
        rng = substream(8, "shots")
        with pytest.raises(ValueError, match="degree"):
            iqp_shot_recover(target, MAX_SHOT_DEGREE + 1, 0.05, rng)
        with pytest.raises(ValueError, match="delta"):
            iqp_shot_recover(target, 1, 0.0, rng)
        one = StateVector(1, np.array([1.0, 0.0], dtype=complex))
        with pytest.raises(ValueError, match="2 qubits"):
            iqp_shot_recover(one, 1, 0.05, rng)


# ---------------------------------------------------------------------------
# loader assembly details

class TestAssembledCircuit:
    def test_all_angles_bound(self):
        spec = IqpSpec(3, ((0, 1), (1, 2)), (math.pi / 3, -math.pi / 3))
        circ, _ = iqp_exact_load(iqp_state(spec), 1)
        assert circ.num_params == 0
        assert all(op.param is not None for op in circ.ops
                   if op.kind in ("RY", "RZ", "RZZ"))

    def test_loads_from_zero_not_plus(self):
        # the product prep is part of the circuit: input is |0..0>
        spec = IqpSpec(2, ((0, 1),), (2 * math.pi / 3,))
        target = iqp_state(spec)
        circ, _ = iqp_exact_load(target, 1)
        assert loader_infidelity(circ, target) < 1e-12

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1))
    def test_exact_load_certificate(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 6))
        K = int(rng.integers(1, 4))
        spec = random_spec(rng, n, min(6, n * (n - 1) // 2),
                           lambda r: grid_angle(r, K))
        target = iqp_state(spec)
        circ, iters = iqp_exact_load(target, K)
        assert iters <= len(spec.edges)
        assert loader_infidelity(circ, target) < 1e-9
