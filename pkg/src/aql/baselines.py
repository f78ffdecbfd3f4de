"""Reference loaders: bond-2 MPS sweeps, hardware-efficient training, and
environment-SVD unit updates, plus the analytic two-qubit gate accounting.

All three methods emit loader circuits over the same gate set as the main
engine so results are directly comparable through `gate_count_table`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ._seeding import substream
from .optimize import adam, adjoint_gradient
from .statevector import (
    Circuit,
    GateOp,
    StateVector,
    _qubit_front,
    apply_circuit,
    apply_circuit_inplace,
    fidelity,
)

REAL_ATOL = 1e-12


def _is_real_state(amps: np.ndarray) -> bool:
    return bool(np.max(np.abs(amps.imag)) < REAL_ATOL) if amps.size else True


# ---------------------------------------------------------------------------
# gate accounting


def gate_count_table(method: str, n: int, k: int) -> int:
    """Two-qubit gate count of `k` method units on `n` qubits.

    Units are method-specific: SVD-update units for aqce, layers for mps and
    hec, entangler blocks for aqer.  Real-valued unitaries synthesize into
    fewer entanglers than complex ones, hence the paired entries.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    table = {
        "aqce_complex": 15 * k,   # adding step = 5 unitaries, 3 gates each
        "aqce_real": 10 * k,      # adding step = 5 unitaries, 2 gates each
        "mps_complex": 3 * (n - 1) * k,
        "mps_real": 2 * (n - 1) * k,
        "hec": math.ceil(n * k / 2),
        "aqer": k,
    }
    if method not in table:
        raise ValueError(f"unknown method {method!r}")
    return table[method]


# ---------------------------------------------------------------------------
# bond-2 MPS layers


@dataclass(frozen=True)
class Mps2Layer:
    """One disentangling layer: unitaries[i] is a 4x4 acting on (i, i+1).

    The disentangler applies unitaries[0]^dag first and unitaries[-1]^dag
    last; the loading direction is the reversed adjoint of that.
    """

    unitaries: Tuple[np.ndarray, ...]

    def __post_init__(self):
        for i, g in enumerate(self.unitaries):
            if g.shape != (4, 4):
                raise ValueError(f"unitary {i} has shape {g.shape}")
            if np.max(np.abs(g.conj().T @ g - np.eye(4))) > 1e-10:
                raise ValueError(f"unitary {i} is not unitary within 1e-10")

    @property
    def num_qubits(self) -> int:
        return len(self.unitaries) + 1

    def loading_ops(self) -> List[GateOp]:
        """Gates in time order for the loading direction (last pair first)."""
        n = self.num_qubits
        return [GateOp("U2Q", (i, i + 1), matrix=self.unitaries[i])
                for i in range(n - 2, -1, -1)]


def _bond2_tensors(amps: np.ndarray, n: int) -> List[np.ndarray]:
    """Sequential left-to-right SVD truncation to bond dimension 2.

    Returns [A0 (2x2), A1..A_{n-2} (4x2, rows = 2*bond + phys), A_{n-1} (2x2)]
    with every tensor but the last an isometry and the chain renormalized at
    each truncated cut.  Real input keeps everything in float64 so the gate
    accounting sees real unitaries.
    """
    t = amps.reshape((2,) * n).transpose(range(n - 1, -1, -1))  # axes s0..s_{n-1}
    tensors: List[np.ndarray] = []
    u, s, w = np.linalg.svd(t.reshape(2, -1), full_matrices=False)
    tensors.append(u)
    carry = (s / np.linalg.norm(s))[:, None] * w
    for _ in range(1, n - 1):
        u, s, w = np.linalg.svd(carry.reshape(4, -1), full_matrices=False)
        u, s, w = u[:, :2], s[:2], w[:2]
        tensors.append(u)
        carry = (s / np.linalg.norm(s))[:, None] * w
    tensors.append(carry)
    return tensors


def _complete_unitary(designated: List[Tuple[int, np.ndarray]]) -> np.ndarray:
    """4x4 unitary with the given (column index, column) entries.

    Free columns are filled by column-pivoted Gram-Schmidt over the canonical
    basis: at each step the basis vector with the largest residual wins
    (strict >, so ties resolve to the lowest index), making the completion
    deterministic.
    """
    g = np.zeros((4, 4), dtype=complex)
    placed = []
    for idx, col in designated:
        g[:, idx] = col
        placed.append(col)
    free = [j for j in range(4) if j not in {i for i, _ in designated}]
    eye = np.eye(4, dtype=complex)
    for j in free:
        best, best_norm = None, -1.0
        for k in range(4):
            r = eye[:, k].copy()
            for p in placed:
                r -= np.vdot(p, r) * p
            rn = float(np.linalg.norm(r))
            if rn > best_norm:
                best, best_norm = r, rn
        col = best / best_norm
        g[:, j] = col
        placed.append(col)
    return g


def _layer_from_tensors(tensors: List[np.ndarray]) -> Mps2Layer:
    """Turn chain tensors into per-pair unitaries via designated columns.

    Pair p's unitary maps |bit_p=0, bit_{p+1}=b> to the chain's two-site map
    for bond index b (a single column for the final pair), so the adjoint
    chain frees qubit p into |0> while handing the bond to qubit p+1.
    """
    n = len(tensors)
    unitaries: List[np.ndarray] = []
    for p in range(n - 1):
        if p == 0 and n > 2:
            a0, a1 = tensors[0], tensors[1].reshape(2, 2, 2)  # [a, s1, b]
            t = np.einsum("sa,axb->sxb", a0, a1)              # [s0, s1, b]
            cols = t.transpose(1, 0, 2).reshape(4, 2)         # row = s0 + 2*s1
            designated = [(0, cols[:, 0]), (2, cols[:, 1])]
        elif p < n - 2:
            a = tensors[p + 1].reshape(2, 2, 2)               # [a, s, b]
            cols = a.transpose(1, 0, 2).reshape(4, 2)         # row = a + 2*s
            designated = [(0, cols[:, 0]), (2, cols[:, 1])]
        elif p == 0:  # n == 2: single pair carries the whole state
            a0, a1 = tensors
            vec = np.einsum("sa,ax->sx", a0, a1).T.reshape(4)  # row = s0 + 2*s1
            designated = [(0, vec)]
        else:
            a = tensors[n - 1]                                 # [a, s]
            designated = [(0, a.T.reshape(4))]                 # row = a + 2*s
        unitaries.append(_complete_unitary(
            [(i, c.astype(complex)) for i, c in designated]))
    return Mps2Layer(tuple(unitaries))


def mps_layer_extract(state: StateVector) -> Tuple[Mps2Layer, StateVector]:
    """One bond-2 disentangling layer and the partially disentangled residual.

    The layer's loading direction maps |0...0> exactly onto the sequential
    bond-2 truncation of `state`; the residual is the adjoint chain applied
    to `state` itself, which lands on |0...0> when the input is an exact
    bond-2 chain.
    """
    n = state.num_qubits
    if n < 2:
        raise ValueError("layer extraction needs at least 2 qubits")
    real = _is_real_state(state.amplitudes)
    amps = np.real(state.amplitudes) if real else state.amplitudes
    tensors = _bond2_tensors(amps, n)
    layer = _layer_from_tensors(tensors)
    resid = state.copy()
    loading = Circuit(n, layer.loading_ops())
    apply_circuit_inplace(resid.amplitudes, loading, adjoint=True)
    return layer, resid


def mps_loader(target: StateVector, layers: int) -> Tuple[Circuit, float, int]:
    """Stack disentangling layers; the loader is the adjoint stack on |0...0>."""
    if layers < 1:
        raise ValueError("layers must be >= 1")
    n = target.num_qubits
    real = _is_real_state(target.amplitudes)
    extracted: List[Mps2Layer] = []
    resid = target
    for _ in range(layers):
        layer, resid = mps_layer_extract(resid)
        extracted.append(layer)
    ops: List[GateOp] = []
    for layer in reversed(extracted):
        ops.extend(layer.loading_ops())
    circ = Circuit(n, ops)
    loaded = apply_circuit(StateVector.zero(n), circ)
    infid = 1.0 - fidelity(target, loaded)
    g = gate_count_table("mps_real" if real else "mps_complex", n, layers)
    return circ, infid, g


# ---------------------------------------------------------------------------
# hardware-efficient circuits


def hec_pairs(n: int, layer: int) -> List[Tuple[int, int]]:
    """CNOT (control, target) pairs of one entangling layer.

    Even layers pair (2m, 2m+1 mod n), odd layers pair (2m+1, 2m+2 mod n);
    the wrap pair appears when the leading index reaches n-1.
    """
    start = 0 if layer % 2 == 0 else 1
    return [(c, (c + 1) % n) for c in range(start, n, 2)]


def hec_build(n: int, layers: int) -> Circuit:
    """Rotation columns (RY then RZ, one parameter slot each) plus CNOT
    columns realized as H-CZ-H on the alternating pair pattern."""
    if n < 2:
        raise ValueError("hardware-efficient circuit needs n >= 2")
    if layers < 1:
        raise ValueError("layers must be >= 1")
    circ = Circuit(n)
    slot = 0
    for layer in range(layers):
        for q in range(n):
            circ.append(GateOp("RY", (q,)), slot=slot)
            slot += 1
        for q in range(n):
            circ.append(GateOp("RZ", (q,)), slot=slot)
            slot += 1
        for control, targ in hec_pairs(n, layer):
            circ.append(GateOp("H", (targ,)))
            circ.append(GateOp("CZ", (control, targ)))
            circ.append(GateOp("H", (targ,)))
    return circ


def hec_train(target: StateVector, circuit: Circuit,
              seed: int = 0) -> Tuple[np.ndarray, float]:
    """Train the circuit's rotation angles against the overlap loss.

    Initialization is Uniform[0, 2*pi) from the seed's training substream;
    optimization is 2000 iterations of adam at lr 1e-2 on exact gradients.
    """
    rng = substream(seed, "step3")
    theta0 = rng.uniform(0.0, 2.0 * np.pi, size=circuit.num_params)

    def loss_and_grad(theta):
        return adjoint_gradient(target, circuit, theta)

    result = adam(loss_and_grad, theta0, lr=1e-2, iters=2000)
    return result.best_params, float(result.best_value)


# ---------------------------------------------------------------------------
# environment-SVD unit updates


@dataclass
class AqceState:
    """Unit list plus the per-update fidelity certificates."""

    unitaries: List[Tuple[Tuple[int, int], np.ndarray]] = field(default_factory=list)
    fidelity_trace: List[float] = field(default_factory=list)
    svd_failures: int = 0


def _svd_env(env: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return np.linalg.svd(env)


def _env_for_pair(right: np.ndarray, left: np.ndarray, n: int,
                  pair: Tuple[int, int]) -> np.ndarray:
    """4x4 environment: trace of |right><left| over the pair's complement."""
    r = _qubit_front(right, n, pair)
    l = _qubit_front(left, n, pair)
    return r @ l.conj().T


def _all_pairs(n: int) -> List[Tuple[int, int]]:
    return [(a, b) for a in range(n) for b in range(a + 1, n)]


def _update_unit(state: "AqceState", m: int, left: np.ndarray,
                 right: np.ndarray, n: int, real: bool) -> None:
    """Replace unit m with the environment-SVD optimum over all pairs.

    The winning pair maximizes the singular-value sum (strict >, so the
    lexicographically first pair wins ties); the certified fidelity of the
    whole chain after the update is that sum squared.
    """
    best = None
    for pair in _all_pairs(n):
        env = _env_for_pair(right, left, n, pair)
        if real:
            env = env.real
        try:
            x, d, y = _svd_env(env)
        except np.linalg.LinAlgError:
            state.svd_failures += 1
            continue
        trace_d = float(np.sum(d))
        if best is None or trace_d > best[0]:
            best = (trace_d, pair, (x @ y).astype(complex))
    if best is None:
        return  # every candidate SVD failed; keep the old unit
    trace_d, pair, g_new = best
    state.unitaries[m] = (pair, g_new)
    state.fidelity_trace.append(trace_d ** 2)


def _prefix_states(state: "AqceState", n: int,
                   count: int) -> List[np.ndarray]:
    """L_m = G_{m-1}...G_0 |0...0> for m in [0, count)."""
    lefts = [StateVector.zero(n).amplitudes]
    for i in range(count - 1):
        pair, g = state.unitaries[i]
        amps = lefts[-1].copy()
        _apply_u2q(amps, n, pair, g, adjoint=False)
        lefts.append(amps)
    return lefts


def _apply_u2q(amps: np.ndarray, n: int, pair: Tuple[int, int],
               g: np.ndarray, adjoint: bool) -> None:
    from .statevector import apply_gate_inplace

    apply_gate_inplace(amps, n, GateOp("U2Q", pair, matrix=g), adjoint=adjoint)


def aqce_run(target: StateVector, total_units: int,
             units_per_expansion: int = 5,
             sweeps_per_expansion: int = 200
             ) -> Tuple[AqceState, Circuit, float, int]:
    """Grow a chain of two-qubit unitaries by environment-SVD updates.

    The chain acts on |0...0>.  Expansion appends identity units (up to
    `units_per_expansion` at a time, never exceeding `total_units`), then
    runs `sweeps_per_expansion` forward-backward passes; each unit update is
    locally fidelity-optimal given the rest of the chain, so the fidelity
    trace never decreases.
    """
    if total_units < 1:
        raise ValueError("total_units must be >= 1")
    if units_per_expansion < 1 or sweeps_per_expansion < 1:
        raise ValueError("expansion parameters must be >= 1")
    n = target.num_qubits
    if n < 2:
        raise ValueError("unit updates need at least 2 qubits")
    real = _is_real_state(target.amplitudes)
    state = AqceState()
    eye = np.eye(4, dtype=complex)
    while len(state.unitaries) < total_units:
        grow = min(units_per_expansion, total_units - len(state.unitaries))
        state.unitaries.extend([((0, 1), eye.copy()) for _ in range(grow)])
        m_count = len(state.unitaries)
        for _ in range(sweeps_per_expansion):
            # forward pass: left states maintained incrementally, right
            # states peeled from a precomputed suffix stack
            rights = [target.amplitudes.copy()]
            for i in range(m_count - 1, 0, -1):
                pair, g = state.unitaries[i]
                amps = rights[-1].copy()
                _apply_u2q(amps, n, pair, g, adjoint=True)
                rights.append(amps)
            # rights[k] corresponds to suffix starting at unit m_count-k
            left = StateVector.zero(n).amplitudes
            for m in range(m_count):
                _update_unit(state, m, left, rights[m_count - 1 - m], n, real)
                pair, g = state.unitaries[m]
                _apply_u2q(left, n, pair, g, adjoint=False)
            # backward pass: right states maintained incrementally
            lefts = _prefix_states(state, n, m_count)
            right = target.amplitudes.copy()
            for m in range(m_count - 1, -1, -1):
                _update_unit(state, m, lefts[m], right, n, real)
                pair, g = state.unitaries[m]
                _apply_u2q(right, n, pair, g, adjoint=True)
    ops = [GateOp("U2Q", pair, matrix=g) for pair, g in state.unitaries]
    circ = Circuit(n, ops)
    loaded = apply_circuit(StateVector.zero(n), circ)
    infid = 1.0 - fidelity(target, loaded)
    # 2 gates per real unitary, 3 per complex one; equals the table's
    # 10k/15k at full adding steps (total_units = 5k)
    g_count = (2 if real else 3) * total_units
    return state, circ, infid, g_count
