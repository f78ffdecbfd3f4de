"""Dense density-matrix simulation with local depolarizing noise.

A density matrix on N qubits is stored as a 2^N x 2^N complex array but
evolved through the shared state-vector kernels: flattening rho row-major
gives a 2N-qubit amplitude vector in which qubit q of the row index sits at
flat position q + N and qubit q of the column index at flat position q.
U rho U^dagger is then U applied at the shifted positions followed by
conj(U) at the original ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._seeding import substream
from .entanglement import depol_entropy_bounds, renyi2
from .statevector import (
    PARAM_KINDS,
    Circuit,
    GateOp,
    StateVector,
    _qubit_front,
    apply_gate_inplace,
)

MAX_NOISY_QUBITS = 10
HERM_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_ATOL = 1e-8


class DensityMatrix:
    """Hermitian, trace-one, PSD operator over 2^N basis states."""

    __slots__ = ("num_qubits", "matrix")

    def __init__(self, num_qubits: int, matrix: np.ndarray, *, copy: bool = True,
                 check: bool = True):
        num_qubits = int(num_qubits)
        if num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        if num_qubits > MAX_NOISY_QUBITS:
            raise ValueError(
                f"density matrices are capped at {MAX_NOISY_QUBITS} qubits, "
                f"got {num_qubits}")
        dim = 1 << num_qubits
        mat = np.array(matrix, dtype=complex, copy=copy)
        if mat.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {mat.shape}")
        if check:
            herm = float(np.abs(mat - mat.conj().T).max())
            if herm > HERM_ATOL:
                raise ValueError(f"matrix is not Hermitian (deviation {herm:.3e})")
            tr = complex(np.trace(mat))
            if abs(tr - 1.0) > TRACE_ATOL:
                raise ValueError(f"trace is {tr!r}, expected 1")
            lo = float(np.linalg.eigvalsh(mat)[0])
            if lo < -PSD_ATOL:
                raise ValueError(f"matrix is not PSD (min eigenvalue {lo:.3e})")
        self.num_qubits = num_qubits
        self.matrix = mat

    @classmethod
    def from_statevector(cls, state: StateVector) -> "DensityMatrix":
        a = state.amplitudes
        # outer product of a normalized vector is PSD and trace-one by construction
        return cls(state.num_qubits, np.outer(a, a.conj()), copy=False, check=False)

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        if not 1 <= num_qubits <= MAX_NOISY_QUBITS:
            raise ValueError(f"num_qubits must be in [1, {MAX_NOISY_QUBITS}]")
        dim = 1 << num_qubits
        return cls(num_qubits, np.eye(dim, dtype=complex) / dim, copy=False,
                   check=False)

    def copy(self) -> "DensityMatrix":
        return DensityMatrix(self.num_qubits, self.matrix, copy=True, check=False)

    def purity(self) -> float:
        """Tr rho^2, computed as the squared Frobenius norm (rho Hermitian)."""
        return float(np.vdot(self.matrix, self.matrix).real)

    def rdm1(self, q: int) -> np.ndarray:
        """Single-qubit marginal (exact partial trace, O(4^N))."""
        n = self.num_qubits
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range")
        m = _qubit_front(self.matrix.reshape(-1), 2 * n, (q + n, q))
        r = 1 << (n - 1)
        loc = np.trace(m.reshape(4, r, r), axis1=1, axis2=2)
        return np.array([[loc[0], loc[2]], [loc[1], loc[3]]])

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"


def marginal_entropy_total(dm: DensityMatrix) -> float:
    """Sum over qubits of the collision entropy of each single-qubit marginal.

    Coincides with the loader objective on pure states and extends it to
    mixed ones.
    """
    return sum(renyi2(dm.rdm1(q)) for q in range(dm.num_qubits))


def state_overlap(dm: DensityMatrix, state: StateVector) -> float:
    """<psi| rho |psi> as a real number."""
    if dm.num_qubits != state.num_qubits:
        raise ValueError("state and density matrix qubit counts differ")
    a = state.amplitudes
    return float(np.vdot(a, dm.matrix @ a).real)


# ---------------------------------------------------------------------------
# flat-vector kernels (length 4**n, see module docstring)

def _unfront(block: np.ndarray, n: int, qs: tuple[int, ...]) -> np.ndarray:
    """Inverse of _qubit_front: scatter a fronted block back to flat order."""
    axes = [n - 1 - q for q in reversed(qs)]
    rest = [ax for ax in range(n) if ax not in axes]
    inv = np.argsort(axes + rest)
    return block.reshape((2,) * n).transpose(inv).reshape(-1)


def _evolve_flat(flat: np.ndarray, n: int, op: GateOp,
                 angle: float | None = None) -> None:
    """U rho U^dagger in place on the flattened matrix."""
    theta = None
    if op.kind in PARAM_KINDS:
        val = op.param if angle is None else angle
        if val is None:
            raise ValueError(f"{op.kind} needs an angle")
        theta = float(val)
    row = GateOp(op.kind, tuple(q + n for q in op.qubits), matrix=op.matrix)
    apply_gate_inplace(flat, 2 * n, row, angle=theta)
    if op.kind == "U2Q":
        col = GateOp("U2Q", op.qubits, matrix=op.matrix.conj())
        apply_gate_inplace(flat, 2 * n, col)
    else:
        # entrywise conjugate: RY/H/X/CZ are real, RZ/RZZ flip the angle sign
        col_theta = theta if op.kind == "RY" else None if theta is None else -theta
        apply_gate_inplace(flat, 2 * n, op, angle=col_theta)


def _depolarize_flat(flat: np.ndarray, n: int, qs: tuple[int, ...],
                     p: float) -> np.ndarray:
    """(1-p) rho + p (I/d tensor Tr_local rho); returns a new flat array."""
    if p == 0.0:
        return flat
    d = 1 << len(qs)
    fq = tuple(q + n for q in qs) + tuple(qs)
    m = _qubit_front(flat, 2 * n, fq)  # local row index r + d*c
    tau = m[:: d + 1].sum(axis=0)      # rows with r == c trace out the pair
    m *= 1.0 - p
    m[:: d + 1] += (p / d) * tau
    return _unfront(m, 2 * n, fq)


# ---------------------------------------------------------------------------
# public channel operations

def evolve_unitary(dm: DensityMatrix, gate: GateOp,
                   angle: float | None = None) -> DensityMatrix:
    """Apply one gate as U rho U^dagger; the result is re-validated."""
    n = dm.num_qubits
    for q in gate.qubits:
        if q < 0 or q >= n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    flat = dm.matrix.reshape(-1).copy()
    _evolve_flat(flat, n, gate, angle)
    dim = 1 << n
    return DensityMatrix(n, flat.reshape(dim, dim), copy=False, check=True)


def depolarize(dm: DensityMatrix, qubits, p: float) -> DensityMatrix:
    """(1-p) rho + p (I_local/d tensor Tr_local rho) on one or two qubits."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing rate {p} outside [0, 1]")
    qs = tuple(int(q) for q in qubits)
    if len(qs) not in (1, 2) or len(set(qs)) != len(qs):
        raise ValueError(f"depolarize takes 1 or 2 distinct qubits, got {qs}")
    n = dm.num_qubits
    for q in qs:
        if q < 0 or q >= n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")
    flat = _depolarize_flat(dm.matrix.reshape(-1).copy(), n, qs, p)
    dim = 1 << n
    return DensityMatrix(n, flat.reshape(dim, dim), copy=False, check=True)


def depol_diamond_bound(p: float) -> float:
    """Analytic diamond-distance bound between rate-p depolarizing and identity.

    The channel difference factors as p times (replace-with-maximally-mixed
    minus identity), and any difference of two channels has diamond norm at
    most 2, giving 2p.  Exact diamond norms (an SDP) are out of scope.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing rate {p} outside [0, 1]")
    return 2.0 * p


# ---------------------------------------------------------------------------
# noisy loading experiment

def noisy_load_eval(target: StateVector, circuit: Circuit, params=None,
                    p1: float = 0.0, p2: float = 0.0, *,
                    placement: str = "per-gate") -> float:
    """Infidelity 1 - <target| rho |target> of a noisy circuit run from |0..0>.

    A rate-p1 depolarizing channel follows each single-qubit gate on its
    qubit and a rate-p2 channel each two-qubit gate on its pair.  With
    placement "per-layer", a contiguous run of single-qubit gates counts as
    one dressed layer instead: each touched qubit is depolarized once when
    the run ends.
    """
    n = circuit.num_qubits
    if target.num_qubits != n:
        raise ValueError("circuit and target qubit counts differ")
    if n > MAX_NOISY_QUBITS:
        raise ValueError(
            f"noisy evaluation is capped at {MAX_NOISY_QUBITS} qubits, got {n}")
    for name, p in (("p1", p1), ("p2", p2)):
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"{name} = {p} outside [0, 1]")
    if placement not in ("per-gate", "per-layer"):
        raise ValueError(f"unknown noise placement {placement!r}")
    P = circuit.num_params
    if P:
        if params is None or len(params) != P:
            got = 0 if params is None else len(params)
            raise ValueError(f"circuit takes {P} parameters, got {got}")
    elif params is not None and len(params) != 0:
        raise ValueError(f"circuit takes no parameters, got {len(params)}")

    flat = np.zeros(1 << (2 * n), dtype=complex)
    flat[0] = 1.0
    pending: set[int] = set()

    def flush() -> np.ndarray:
        out = flat
        for q in sorted(pending):
            out = _depolarize_flat(out, n, (q,), p1)
        pending.clear()
        return out

    for i, op in enumerate(circuit.ops):
        ang = circuit.angle_of(i, params) if op.kind in PARAM_KINDS else None
        if len(op.qubits) == 2 and pending:
            flat = flush()  # close the single-qubit layer before the pair gate
        _evolve_flat(flat, n, op, ang)
        if len(op.qubits) == 1:
            if placement == "per-gate":
                flat = _depolarize_flat(flat, n, op.qubits, p1)
            else:
                pending.add(op.qubits[0])
        else:
            flat = _depolarize_flat(flat, n, op.qubits, p2)
    if pending:
        flat = flush()

    rho = flat.reshape(1 << n, 1 << n)
    t = target.amplitudes
    return 1.0 - float(np.vdot(t, rho @ t).real)


# ---------------------------------------------------------------------------
# entropy-envelope verification under per-qubit depolarization

@dataclass(frozen=True)
class DepolBoundsReport:
    num_qubits: int
    trials: int
    checks: int
    max_violation: float
    p_grid: tuple[float, ...]


def verify_depol_bounds(num_qubits: int, trials: int, p_grid,
                        seed: int = 0) -> DepolBoundsReport:
    """Check the entropy envelope after rate-p depolarization of every qubit.

    Alternates random pure states with Ginibre-induced mixed states of random
    rank and verifies lower <= S_out <= upper per depol_entropy_bounds at
    each grid rate.  Reports the largest violation found (0 when all checks
    land inside the envelope).
    """
    if not 1 <= num_qubits <= 6:
        raise ValueError("envelope verification is capped at 6 qubits")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    grid = tuple(float(p) for p in p_grid)
    if not grid:
        raise ValueError("p_grid must be non-empty")
    for p in grid:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"depolarizing rate {p} outside [0, 1]")
    rng = substream(seed, "depol-verify")
    dim = 1 << num_qubits
    worst = 0.0
    checks = 0
    for t in range(trials):
        if t % 2 == 0:
            a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            rho = np.outer(a, a.conj()) / float(np.vdot(a, a).real)
        else:
            k = int(rng.integers(1, dim + 1))
            g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
            rho = g @ g.conj().T
            rho /= float(np.trace(rho).real)
        dm = DensityMatrix(num_qubits, rho, copy=False, check=False)
        s_in = marginal_entropy_total(dm)
        for p in grid:
            out = dm
            for q in range(num_qubits):
                out = depolarize(out, (q,), p)
            s_out = marginal_entropy_total(out)
            lo, hi = depol_entropy_bounds(min(s_in, float(num_qubits)),
                                          num_qubits, p)
            worst = max(worst, lo - s_out, s_out - hi)
            checks += 1
    return DepolBoundsReport(num_qubits, trials, checks, worst, grid)
