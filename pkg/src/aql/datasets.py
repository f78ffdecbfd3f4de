"""Target-state generators and downstream observables.

Covers the benchmark families the loader is evaluated on: TFIM/XXZ ground
states (matrix-free Lanczos), GHZ, 1D/2D random circuit states, diagonal-phase
(IQP) states, classical-vector encodings, plus magnetization and kernel-matrix
observables computed from loaded states.

Every generator is a pure function of (spec, seed); randomness flows through
the "dataset" substream of the master seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._seeding import substream
from .statevector import (
    Circuit,
    GateOp,
    StateVector,
    apply_circuit,
    pauli_expectation,
)

MAX_SITES = 20          # matrix-free eigensolver budget
MAX_DENSE_SITES = 12    # dense cross-check path
LANCZOS_MAX_ITER = 500
LANCZOS_TOL = 1e-8
# Symmetric tie-break field: g -> g + TFIM_FIELD_EPS so the ferromagnetic
# doublet at g ~ 0 resolves to the symmetric superposition deterministically.
TFIM_FIELD_EPS = 1e-10

_PAULI = {
    "I": np.eye(2),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


@dataclass(frozen=True)
class SpinHamiltonianSpec:
    """Open-boundary spin-1/2 Hamiltonian on a chain or rectangular grid.

    model "tfim": H = -J * sum_edges Z_a Z_b  -  g * sum_n X_n
    model "xxz":  H = sum_edges [Jxy * (X_a X_b + Y_a Y_b) + Jz * Z_a Z_b]

    `couplings` is (J, g) for tfim and (Jxy, Jz) for xxz.  `shape` is (N,)
    for a chain or (rows, cols) for a grid; qubit index is row-major with
    qubit 0 the least-significant bit.
    """

    model: str
    shape: Tuple[int, ...]
    couplings: Tuple[float, float]

    def __post_init__(self):
        if self.model not in ("tfim", "xxz"):
            raise ValueError(f"unknown model {self.model!r}")
        shape = tuple(int(d) for d in self.shape)
        if len(shape) not in (1, 2) or any(d < 1 for d in shape):
            raise ValueError(f"shape must be (N,) or (rows, cols), got {self.shape}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "couplings",
                           (float(self.couplings[0]), float(self.couplings[1])))
        if not all(np.isfinite(c) for c in self.couplings):
            raise ValueError("couplings must be finite")
        if self.num_sites > MAX_SITES:
            raise ValueError(
                f"{self.num_sites} sites exceeds the {MAX_SITES}-site budget")

    @classmethod
    def tfim_chain(cls, n: int, j: float = 1.0, g: float = 1.0) -> "SpinHamiltonianSpec":
        return cls("tfim", (n,), (j, g))

    @classmethod
    def tfim_grid(cls, rows: int, cols: int, j: float = 1.0,
                  g: float = 1.0) -> "SpinHamiltonianSpec":
        return cls("tfim", (rows, cols), (j, g))

    @classmethod
    def xxz_chain(cls, n: int, jxy: float = 1.0, jz: float = 1.0) -> "SpinHamiltonianSpec":
        return cls("xxz", (n,), (jxy, jz))

    @classmethod
    def xxz_grid(cls, rows: int, cols: int, jxy: float = 1.0,
                 jz: float = 1.0) -> "SpinHamiltonianSpec":
        return cls("xxz", (rows, cols), (jxy, jz))

    @property
    def num_sites(self) -> int:
        n = 1
        for d in self.shape:
            n *= d
        return n

    def edges(self) -> List[Tuple[int, int]]:
        """Nearest-neighbor pairs, open boundaries, row-major site order."""
        if len(self.shape) == 1:
            n = self.shape[0]
            return [(i, i + 1) for i in range(n - 1)]
        rows, cols = self.shape
        out: List[Tuple[int, int]] = []
        for i in range(rows):
            for j in range(cols):
                q = i * cols + j
                if j + 1 < cols:
                    out.append((q, q + 1))
                if i + 1 < rows:
                    out.append((q, q + cols))
        return out


@dataclass(frozen=True)
class IqpSpec:
    """Interaction graph plus one ZZ-phase angle per edge.

    Edges are normalized to (a, b) with a < b and stored sorted; `angles`
    runs parallel to `edges`.
    """

    num_qubits: int
    edges: Tuple[Tuple[int, int], ...]
    angles: Tuple[float, ...]

    def __post_init__(self):
        n = int(self.num_qubits)
        if n < 1:
            raise ValueError("num_qubits must be >= 1")
        if len(self.edges) != len(self.angles):
            raise ValueError("edges and angles must have equal length")
        pairs = []
        for (a, b), w in zip(self.edges, self.angles):
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"edge ({a},{b}) is a self-loop")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a},{b}) out of range for {n} qubits")
            if not np.isfinite(w):
                raise ValueError("angles must be finite")
            pairs.append(((min(a, b), max(a, b)), float(w)))
        pairs.sort(key=lambda ew: ew[0])
        edges = tuple(e for e, _ in pairs)
        if len(set(edges)) != len(edges):
            raise ValueError("edges must be distinct")
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "angles", tuple(w for _, w in pairs))

    @classmethod
    def from_angle_map(cls, num_qubits: int,
                       angle_map: Dict[Tuple[int, int], float]) -> "IqpSpec":
        items = list(angle_map.items())
        return cls(num_qubits, tuple(e for e, _ in items),
                   tuple(w for _, w in items))

    def angle_map(self) -> Dict[Tuple[int, int], float]:
        return dict(zip(self.edges, self.angles))

    def degree(self, n: int) -> int:
        return sum(1 for (a, b) in self.edges if n in (a, b))

    def max_degree(self) -> int:
        return max((self.degree(n) for n in range(self.num_qubits)), default=0)


# ---------------------------------------------------------------------------
# spin-model ground states


def _tfim_matvec(spec: SpinHamiltonianSpec):
    """Matrix-free H.v for the TFIM, term-by-term Pauli action, real dtype."""
    n = spec.num_sites
    j, g = spec.couplings
    g_eff = g + TFIM_FIELD_EPS
    idx = np.arange(1 << n, dtype=np.int64)
    diag = np.zeros(1 << n)
    for a, b in spec.edges():
        bits_a = (idx >> a) & 1
        bits_b = (idx >> b) & 1
        # Z_a Z_b is +1 on aligned bits, -1 otherwise
        diag -= j * np.where(bits_a == bits_b, 1.0, -1.0)

    def matvec(v: np.ndarray) -> np.ndarray:
        w = diag * v
        for q in range(n):
            flipped = v.reshape(-1, 2, 1 << q)[:, ::-1, :].reshape(-1)
            w -= g_eff * flipped
        return w

    return matvec


def _xxz_matvec(spec: SpinHamiltonianSpec):
    """Matrix-free H.v for the XXZ model on the grid/chain edges."""
    n = spec.num_sites
    jxy, jz = spec.couplings
    idx = np.arange(1 << n, dtype=np.int64)
    diag = np.zeros(1 << n)
    hop: List[Tuple[np.ndarray, np.ndarray]] = []
    for a, b in spec.edges():
        bits_a = (idx >> a) & 1
        bits_b = (idx >> b) & 1
        diag += jz * np.where(bits_a == bits_b, 1.0, -1.0)
        # X_a X_b + Y_a Y_b = 2(|01><10| + |10><01|) on the (a, b) pair
        src = idx[(bits_a == 1) & (bits_b == 0)]
        hop.append((src, src - (1 << a) + (1 << b)))

    def matvec(v: np.ndarray) -> np.ndarray:
        w = diag * v
        for src, dst in hop:
            w[dst] += 2.0 * jxy * v[src]
            w[src] += 2.0 * jxy * v[dst]
        return w

    return matvec


def _matvec_for(spec: SpinHamiltonianSpec):
    return _tfim_matvec(spec) if spec.model == "tfim" else _xxz_matvec(spec)


def hamiltonian_matrix(spec: SpinHamiltonianSpec) -> np.ndarray:
    """Dense Hamiltonian via Kronecker embedding; cross-check path, N <= 12."""
    n = spec.num_sites
    if n > MAX_DENSE_SITES:
        raise ValueError(f"dense path capped at {MAX_DENSE_SITES} sites, got {n}")

    def embed(factors: Dict[int, np.ndarray]) -> np.ndarray:
        full = np.eye(1)
        for q in range(n):
            full = np.kron(factors.get(q, _PAULI["I"]), full)
        return full

    dim = 1 << n
    h = np.zeros((dim, dim), dtype=complex)
    if spec.model == "tfim":
        j, g = spec.couplings
        g_eff = g + TFIM_FIELD_EPS
        for a, b in spec.edges():
            h -= j * embed({a: _PAULI["Z"], b: _PAULI["Z"]})
        for q in range(n):
            h -= g_eff * embed({q: _PAULI["X"]})
    else:
        jxy, jz = spec.couplings
        for a, b in spec.edges():
            h += jxy * embed({a: _PAULI["X"], b: _PAULI["X"]})
            h += jxy * embed({a: _PAULI["Y"], b: _PAULI["Y"]})
            h += jz * embed({a: _PAULI["Z"], b: _PAULI["Z"]})
    return np.real_if_close(h, tol=1)


def _lanczos_ground(matvec, dim: int, tol: float = LANCZOS_TOL,
                    max_iter: int = LANCZOS_MAX_ITER) -> Tuple[np.ndarray, float]:
    """Lowest eigenpair by Lanczos with full reorthogonalization.

    The Krylov basis is kept in full and every new direction is
    re-orthogonalized against all of it (twice), trading memory for immunity
    to the ghost-eigenvalue drift of the bare three-term recurrence.
    Convergence is an explicit residual check ||H u - E u|| < tol.
    """
    rng = np.random.default_rng(0x4C435A)  # fixed: the result is seed-free
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    cap = min(16, max_iter + 1)
    basis = np.empty((cap, dim))
    basis[0] = v
    k = 1
    alphas: List[float] = []
    betas: List[float] = []
    for _ in range(max_iter):
        w = matvec(basis[k - 1])
        alphas.append(float(basis[k - 1] @ w))
        for _ in range(2):
            live = basis[:k]
            w = w - (live @ w) @ live
        beta = float(np.linalg.norm(w))
        theta, y = _tridiag_ground(alphas, betas)
        # cheap Ritz residual bound; confirm with an exact matvec before
        # accepting, since the estimate ignores reorthogonalization error
        if beta * abs(y[-1]) < tol or beta < 1e-13:
            u = y @ basis[:k]
            if float(np.linalg.norm(matvec(u) - theta * u)) < tol:
                u /= np.linalg.norm(u)
                if u[int(np.argmax(np.abs(u)))] < 0:
                    u = -u
                return u, theta
            if beta < 1e-13:
                break  # Krylov space exhausted without meeting tol
        if k == cap:
            cap = min(2 * cap, max_iter + 1)
            grown = np.empty((cap, dim))
            grown[:k] = basis
            basis = grown
        betas.append(beta)
        basis[k] = w / beta
        k += 1
    raise ValueError(
        f"Lanczos did not reach residual < {tol} within {max_iter} iterations")


def _tridiag_ground(alphas: Sequence[float],
                    betas: Sequence[float]) -> Tuple[float, np.ndarray]:
    vals, vecs = eigh_tridiagonal(np.asarray(alphas), np.asarray(betas),
                                  select="i", select_range=(0, 0))
    return float(vals[0]), vecs[:, 0]


def ground_state(spec: SpinHamiltonianSpec) -> Tuple[StateVector, float]:
    """Ground state and energy of the spec's Hamiltonian.

    Matrix-free Lanczos throughout (the dense route in `hamiltonian_matrix`
    exists as an independent cross-check, not a fallback).  The returned
    amplitudes are real with the largest-magnitude entry positive.
    """
    matvec = _matvec_for(spec)
    vec, energy = _lanczos_ground(matvec, 1 << spec.num_sites)
    state = StateVector(spec.num_sites, vec.astype(complex), copy=False,
                        check=False)
    return state, energy


# ---------------------------------------------------------------------------
# circuit-generated families


def ghz(n: int) -> StateVector:
    """(|0...0> + |1...1>)/sqrt(2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = np.sqrt(0.5)
    return StateVector(n, amps, copy=False, check=False)


def _append_rotation(ops: List[GateOp], axis: int, qubit: int, theta: float) -> None:
    # axis 0/1/2 = X/Y/Z; RX(t) = H RZ(t) H keeps the gate set fixed
    if axis == 0:
        ops.append(GateOp("H", (qubit,)))
        ops.append(GateOp("RZ", (qubit,), param=theta))
        ops.append(GateOp("H", (qubit,)))
    elif axis == 1:
        ops.append(GateOp("RY", (qubit,), param=theta))
    else:
        ops.append(GateOp("RZ", (qubit,), param=theta))


def random_circuit_state(n: int, w: int, seed: int) -> StateVector:
    """State of a shuffled random circuit: w CZ gates and 3w rotations.

    CZ endpoints are distinct per gate but pairs may repeat across gates;
    rotations draw axis ~ Uniform{X, Y, Z} and angle ~ Uniform[0, 2*pi).
    The w + 3w gates are shuffled uniformly before application.
    """
    if n < 2:
        raise ValueError("random circuit needs n >= 2")
    if w < 0:
        raise ValueError("w must be >= 0")
    rng = substream(seed, "dataset")
    gates: List[List[GateOp]] = []
    for _ in range(w):
        p = int(rng.integers(n))
        q = int(rng.integers(n - 1))
        if q >= p:
            q += 1
        gates.append([GateOp("CZ", (p, q))])
    for _ in range(3 * w):
        qubit = int(rng.integers(n))
        axis = int(rng.integers(3))
        theta = float(rng.uniform(0.0, 2.0 * np.pi))
        ops: List[GateOp] = []
        _append_rotation(ops, axis, qubit, theta)
        gates.append(ops)
    order = rng.permutation(len(gates)) if gates else []
    circ = Circuit(n, [op for i in order for op in gates[int(i)]])
    return apply_circuit(StateVector.zero(n), circ)


def _grid_tilings(rows: int, cols: int) -> List[List[Tuple[int, int]]]:
    """Four CZ tilings: horizontal even/odd columns, vertical even/odd rows."""
    h_even, h_odd, v_even, v_odd = [], [], [], []
    for i in range(rows):
        for j in range(cols):
            q = i * cols + j
            if j + 1 < cols:
                (h_even if j % 2 == 0 else h_odd).append((q, q + 1))
            if i + 1 < rows:
                (v_even if i % 2 == 0 else v_odd).append((q, q + cols))
    return [h_even, h_odd, v_even, v_odd]


def random_circuit_state_2d(rows: int, cols: int, depth: int = 4,
                            seed: int = 0) -> StateVector:
    """Shallow 2D random circuit state on a rows x cols open grid.

    Each layer applies one random rotation per qubit and then one of the
    four nearest-neighbor CZ tilings, cycling so a depth-4 circuit touches
    every grid edge at least once.
    """
    n = rows * cols
    if rows < 1 or cols < 1:
        raise ValueError("grid dimensions must be >= 1")
    if n < 2:
        raise ValueError("grid needs at least 2 sites")
    if n > MAX_SITES:
        raise ValueError(f"{n} sites exceeds the {MAX_SITES}-site budget")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    rng = substream(seed, "dataset")
    tilings = _grid_tilings(rows, cols)
    ops: List[GateOp] = []
    for layer in range(depth):
        for qubit in range(n):
            axis = int(rng.integers(3))
            theta = float(rng.uniform(0.0, 2.0 * np.pi))
            _append_rotation(ops, axis, qubit, theta)
        for pair in tilings[layer % 4]:
            ops.append(GateOp("CZ", pair))
    circ = Circuit(n, ops)
    return apply_circuit(StateVector.zero(n), circ)


def iqp_state(spec: IqpSpec) -> StateVector:
    """H^n . (product of edge ZZ phases) . H^n |0...0>."""
    ops = [GateOp("H", (q,)) for q in range(spec.num_qubits)]
    for (a, b), omega in zip(spec.edges, spec.angles):
        ops.append(GateOp("RZZ", (a, b), param=omega))
    ops += [GateOp("H", (q,)) for q in range(spec.num_qubits)]
    circ = Circuit(spec.num_qubits, ops)
    return apply_circuit(StateVector.zero(spec.num_qubits), circ)


# ---------------------------------------------------------------------------
# classical-vector encodings


def amplitude_encode(v: np.ndarray) -> StateVector:
    """Pad a nonzero vector with zeros to the next power of two, normalize."""
    vec = np.asarray(v, dtype=complex).reshape(-1)
    if vec.size == 0 or not np.any(vec):
        raise ValueError("cannot encode an all-zero vector")
    if not np.all(np.isfinite(vec.view(float))):
        raise ValueError("vector entries must be finite")
    n = max(1, int(np.ceil(np.log2(vec.size))))
    padded = np.zeros(1 << n, dtype=complex)
    padded[:vec.size] = vec
    return StateVector.normalized(padded)


def compact_encode(v: np.ndarray) -> StateVector:
    """Pack 2^(N+1) reals as 2^N complex amplitudes v[j] + i v[j + 2^N]."""
    vec = np.asarray(v, dtype=float).reshape(-1)
    size = vec.size
    if size < 4 or size & (size - 1):
        raise ValueError(f"compact encoding needs length 2^(N+1) >= 4, got {size}")
    if not np.any(vec):
        raise ValueError("cannot encode an all-zero vector")
    if not np.all(np.isfinite(vec)):
        raise ValueError("vector entries must be finite")
    half = size // 2
    return StateVector.normalized(vec[:half] + 1.0j * vec[half:])


def read_vector(path: str) -> np.ndarray:
    """Read a classical vector: .csv (one float per cell) or raw f64 (LE)."""
    if str(path).lower().endswith(".csv"):
        return np.loadtxt(path, delimiter=",", dtype=float).reshape(-1)
    return np.fromfile(path, dtype="<f8")


# ---------------------------------------------------------------------------
# downstream observables


def magnetization(state: StateVector) -> float:
    """Averaged transverse magnetization (1/N) sum_n <X_n>."""
    n = state.num_qubits
    return sum(pauli_expectation(state, "X", q) for q in range(n)) / n


def kernel_matrix(states: Sequence[StateVector]) -> np.ndarray:
    """Gram matrix K_ij = |<psi_i|psi_j>|^2 of pairwise state overlaps."""
    m = len(states)
    k = np.ones((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            ov = np.vdot(states[i].amplitudes, states[j].amplitudes)
            k[i, j] = k[j, i] = float(abs(ov)) ** 2
    return k
