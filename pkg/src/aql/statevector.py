"""Dense state-vector core: gates, circuits, overlaps, reduced density matrices.

Conventions (fixed, also documented in the QSV1 file format):
  * qubit q is bit q of the basis-state integer; qubit 0 is the least
    significant bit,
  * rotations are R_sigma(theta) = exp(-i theta sigma / 2) for
    sigma in {X, Y, Z}, and RZZ(theta) = exp(-i theta (Z x Z) / 2),
  * a two-qubit matrix on qubits (a, b) acts on the index
    m = bit(a) + 2*bit(b), i.e. the first listed qubit is the low bit
    of the 4x4 index.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

GATE_KINDS = ("RY", "RZ", "RZZ", "CZ", "H", "X", "U2Q")
PARAM_KINDS = ("RY", "RZ", "RZZ")

NORM_ATOL = 1e-12

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    p = cmath.exp(-0.5j * theta)
    return np.array([[p, 0.0], [0.0, p.conjugate()]], dtype=complex)


def rzz_phases(theta: float) -> tuple[complex, complex]:
    """Diagonal phases of RZZ: (parallel spins, anti-parallel spins)."""
    p = cmath.exp(-0.5j * theta)
    return p, p.conjugate()


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, qubit tuple, optional fixed angle or explicit 4x4."""

    kind: str
    qubits: tuple[int, ...]
    param: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qs = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qs)
        n_expected = 2 if self.kind in ("RZZ", "CZ", "U2Q") else 1
        if len(qs) != n_expected:
            raise ValueError(f"{self.kind} takes {n_expected} qubit(s), got {qs}")
        if len(set(qs)) != len(qs):
            raise ValueError(f"{self.kind} qubits must be distinct, got {qs}")
        if self.kind == "U2Q":
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (4, 4):
                raise ValueError("U2Q matrix must be 4x4")
            err = np.abs(m.conj().T @ m - np.eye(4)).max()
            if err > 1e-10:
                raise ValueError(f"U2Q matrix is not unitary (deviation {err:.3e})")
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError("only U2Q carries an explicit matrix")
        if self.param is not None and not math.isfinite(self.param):
            raise ValueError("gate angle must be finite")

    @property
    def num_qubits_acted(self) -> int:
        return len(self.qubits)


@dataclass
class Circuit:
    """Ordered gate list with named parameter slots.

    param_slots maps op index -> index into the parameter vector; ops whose
    angle is fixed do not appear.  Slot indices must form the contiguous
    range 0..P-1 (a slot may be referenced by at most one op).
    """

    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)
    param_slots: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        self.validate()

    def validate(self) -> None:
        for i, op in enumerate(self.ops):
            if any(q < 0 or q >= self.num_qubits for q in op.qubits):
                raise ValueError(f"op {i} ({op.kind}) qubits {op.qubits} out of range")
        slots = sorted(self.param_slots.values())
        if slots != list(range(len(slots))):
            raise ValueError("param slots must form a contiguous range 0..P-1")
        if len(set(self.param_slots.values())) != len(self.param_slots):
            raise ValueError("each parameter slot may bind to only one op")
        for i, s in self.param_slots.items():
            if i < 0 or i >= len(self.ops):
                raise ValueError(f"param slot {s} bound to missing op {i}")
            if self.ops[i].kind not in PARAM_KINDS:
                raise ValueError(f"op {i} ({self.ops[i].kind}) cannot be parameterized")

    @property
    def num_params(self) -> int:
        return len(self.param_slots)

    def append(self, op: GateOp, slot: int | None = None) -> None:
        if any(q < 0 or q >= self.num_qubits for q in op.qubits):
            raise ValueError(f"{op.kind} qubits {op.qubits} out of range")
        self.ops.append(op)
        if slot is not None:
            if op.kind not in PARAM_KINDS:
                raise ValueError(f"{op.kind} cannot carry a parameter slot")
            self.param_slots[len(self.ops) - 1] = int(slot)

    def angle_of(self, op_index: int, params: np.ndarray | None) -> float:
        op = self.ops[op_index]
        if op_index in self.param_slots:
            if params is None:
                raise ValueError("circuit has parameter slots but no params given")
            return float(params[self.param_slots[op_index]])
        if op.param is None:
            raise ValueError(f"op {op_index} ({op.kind}) has neither angle nor slot")
        return float(op.param)

    def two_qubit_gate_count(self) -> int:
        return sum(1 for op in self.ops if len(op.qubits) == 2)


class StateVector:
    """Normalized complex amplitude array over 2^N basis states."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray, *, copy: bool = True,
                 check: bool = True):
        num_qubits = int(num_qubits)
        if num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        amps = np.array(amplitudes, dtype=complex, copy=copy).reshape(-1)
        if amps.shape[0] != (1 << num_qubits):
            raise ValueError(
                f"expected {1 << num_qubits} amplitudes, got {amps.shape[0]}")
        if check:
            norm = float(np.linalg.norm(amps))
            if abs(norm - 1.0) > NORM_ATOL:
                raise ValueError(
                    f"state not normalized: ||psi|| = {norm!r} "
                    "(re-normalization is explicit, use StateVector.normalized)")
        self.num_qubits = num_qubits
        self.amplitudes = amps

    @classmethod
    def zero(cls, num_qubits: int) -> "StateVector":
        amps = np.zeros(1 << num_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(num_qubits, amps, copy=False, check=False)

    @classmethod
    def normalized(cls, amplitudes: np.ndarray) -> "StateVector":
        """Explicit re-normalization entry point (never done silently)."""
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = amps.shape[0]
        if n < 2 or n & (n - 1):
            raise ValueError(f"amplitude count {n} is not a power of two >= 2")
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(n.bit_length() - 1, amps / norm, copy=False, check=False)

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes, copy=True, check=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


# ---------------------------------------------------------------------------
# kernels (in place on a flat complex array of length 2**n)

def _apply_1q_kernel(amps: np.ndarray, n: int, q: int, u: np.ndarray) -> None:
    a = amps.reshape(-1, 2, 1 << q)
    x0 = a[:, 0, :].copy()
    x1 = a[:, 1, :]
    a[:, 0, :] = u[0, 0] * x0 + u[0, 1] * x1
    a[:, 1, :] = u[1, 0] * x0 + u[1, 1] * x1


def _apply_diag1_kernel(amps: np.ndarray, n: int, q: int, d0: complex, d1: complex) -> None:
    a = amps.reshape(-1, 2, 1 << q)
    if d0 != 1.0:
        a[:, 0, :] *= d0
    if d1 != 1.0:
        a[:, 1, :] *= d1


def _pair_views(amps: np.ndarray, q0: int, q1: int):
    """Four views of amps indexed by (bit q0, bit q1); q0 is the low 4x4 bit."""
    hi, lo = (q0, q1) if q0 > q1 else (q1, q0)
    a = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    # a axes: [rest, bit hi, mid, bit lo, low]
    if q0 > q1:  # q0 is hi
        def v(b0, b1):
            return a[:, b0, :, b1, :]
    else:
        def v(b0, b1):
            return a[:, b1, :, b0, :]
    return v


def _apply_2q_kernel(amps: np.ndarray, n: int, q0: int, q1: int, u: np.ndarray) -> None:
    v = _pair_views(amps, q0, q1)
    xs = [v(m & 1, m >> 1).copy() for m in range(4)]
    for m in range(4):
        acc = u[m, 0] * xs[0]
        for mp in range(1, 4):
            if u[m, mp] != 0.0:
                acc = acc + u[m, mp] * xs[mp]
        v(m & 1, m >> 1)[...] = acc


def _apply_cz_kernel(amps: np.ndarray, n: int, q0: int, q1: int) -> None:
    v = _pair_views(amps, q0, q1)
    v(1, 1)[...] *= -1.0


def _apply_rzz_kernel(amps: np.ndarray, n: int, q0: int, q1: int, theta: float) -> None:
    p_par, p_anti = rzz_phases(theta)
    v = _pair_views(amps, q0, q1)
    v(0, 0)[...] *= p_par
    v(1, 1)[...] *= p_par
    v(0, 1)[...] *= p_anti
    v(1, 0)[...] *= p_anti


def apply_gate_inplace(amps: np.ndarray, n: int, gate: GateOp,
                       angle: float | None = None, adjoint: bool = False) -> None:
    """Apply one gate to a flat amplitude array, mutating it.

    `angle` overrides gate.param (used when binding circuit parameters);
    `adjoint` applies the inverse gate.
    """
    for q in gate.qubits:
        if q < 0 or q >= n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    kind = gate.kind
    if kind in PARAM_KINDS:
        theta = gate.param if angle is None else angle
        if theta is None:
            raise ValueError(f"{kind} needs an angle")
        theta = float(theta)
        if not math.isfinite(theta):
            raise ValueError("gate angle must be finite")
        if adjoint:
            theta = -theta
        if kind == "RY":
            _apply_1q_kernel(amps, n, gate.qubits[0], ry_matrix(theta))
        elif kind == "RZ":
            p = cmath.exp(-0.5j * theta)
            _apply_diag1_kernel(amps, n, gate.qubits[0], p, p.conjugate())
        else:  # RZZ
            _apply_rzz_kernel(amps, n, gate.qubits[0], gate.qubits[1], theta)
    elif kind == "H":
        _apply_1q_kernel(amps, n, gate.qubits[0], _H)
    elif kind == "X":
        _apply_1q_kernel(amps, n, gate.qubits[0], _X)
    elif kind == "CZ":
        _apply_cz_kernel(amps, n, gate.qubits[0], gate.qubits[1])
    elif kind == "U2Q":
        m = gate.matrix.conj().T if adjoint else gate.matrix
        _apply_2q_kernel(amps, n, gate.qubits[0], gate.qubits[1], m)
    else:  # pragma: no cover
        raise ValueError(f"unknown gate kind {kind!r}")


def apply_gate(state: StateVector, gate: GateOp) -> StateVector:
    """Value-semantic single-gate application (copies, then in-place kernel)."""
    out = state.copy()
    apply_gate_inplace(out.amplitudes, out.num_qubits, gate)
    return out


def apply_circuit_inplace(amps: np.ndarray, circuit: Circuit,
                          params: np.ndarray | None = None,
                          adjoint: bool = False) -> None:
    P = circuit.num_params
    if P:
        if params is None or len(params) != P:
            got = 0 if params is None else len(params)
            raise ValueError(f"circuit takes {P} parameters, got {got}")
    elif params is not None and len(params) not in (0, P):
        raise ValueError(f"circuit takes no parameters, got {len(params)}")
    n = circuit.num_qubits
    order = range(len(circuit.ops) - 1, -1, -1) if adjoint else range(len(circuit.ops))
    for i in order:
        op = circuit.ops[i]
        ang = None
        if op.kind in PARAM_KINDS:
            ang = circuit.angle_of(i, params)
        apply_gate_inplace(amps, n, op, angle=ang, adjoint=adjoint)


def apply_circuit(state: StateVector, circuit: Circuit,
                  params: np.ndarray | None = None,
                  adjoint: bool = False) -> StateVector:
    """Sequential left-to-right application; adjoint mode inverts in reverse order."""
    if circuit.num_qubits != state.num_qubits:
        raise ValueError("circuit and state qubit counts differ")
    out = state.copy()
    apply_circuit_inplace(out.amplitudes, circuit, params, adjoint=adjoint)
    return out


# ---------------------------------------------------------------------------
# overlaps, marginals, expectations

def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; symmetric and global-phase invariant."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("fidelity needs equal qubit counts")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def fidelity_amps(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def _qubit_front(amps: np.ndarray, n: int, qs: tuple[int, ...]) -> np.ndarray:
    """Reshape to (2**len(qs), rest) with the listed qubits as the row index
    (first listed qubit = least significant row bit)."""
    t = amps.reshape((2,) * n)  # axis i holds qubit n-1-i
    axes = [n - 1 - q for q in reversed(qs)]
    rest = [ax for ax in range(n) if ax not in axes]
    t = np.transpose(t, axes + rest)
    return t.reshape(1 << len(qs), -1)


def rdm1(state: StateVector, q: int) -> np.ndarray:
    """Single-qubit reduced density matrix (exact partial trace, O(2^N))."""
    n = state.num_qubits
    if not 0 <= q < n:
        raise ValueError(f"qubit index {q} out of range")
    m = _qubit_front(state.amplitudes, n, (q,))
    return m @ m.conj().T


def rdm2(state: StateVector, q1: int, q2: int) -> np.ndarray:
    """Two-qubit RDM; index convention m = bit(q1) + 2*bit(q2)."""
    n = state.num_qubits
    if not (0 <= q1 < n and 0 <= q2 < n):
        raise ValueError("qubit index out of range")
    if q1 == q2:
        raise ValueError("rdm2 needs two distinct qubits")
    m = _qubit_front(state.amplitudes, n, (q1, q2))
    return m @ m.conj().T


def pauli_expectation(state: StateVector, axis: str, q: int) -> float:
    """<P_q> for P in {X, Y, Z}; exact."""
    if axis not in PAULIS:
        raise ValueError(f"axis must be X, Y or Z, got {axis!r}")
    rho = rdm1(state, q)
    return float(np.trace(rho @ PAULIS[axis]).real)


def shot_estimate(exact_expectation: float, shots: int, rng: np.random.Generator) -> float:
    """Binomial +-1 observable estimate: k ~ B(M, (1+e)/2), returns 2k/M - 1."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    e = float(exact_expectation)
    if abs(e) > 1.0 + 1e-9:
        raise ValueError(f"expectation {e!r} outside [-1, 1]")
    p = min(1.0, max(0.0, (1.0 + e) / 2.0))
    k = rng.binomial(int(shots), p)
    return 2.0 * k / shots - 1.0
