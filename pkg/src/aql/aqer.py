"""Three-step entanglement-reduction loader.

Step I greedily appends two-qubit blocks (RZ, RY on each qubit, then RZZ)
that minimize the entanglement measure S of the evolving target.  Step II
fixes the closed-form product-state rotations from the single-qubit
marginals.  Step III assembles the loader circuit

    U(theta) = V_T(alpha)^dagger . W(beta, gamma)   acting on |0...0>

(adjoint blocks in reverse order, then the per-qubit RY/RZ columns become
the FIRST ops of the circuit) and fine-tunes all 5T + 2N angles against the
infidelity with Adam.

Only the two qubits a block touches change their entropy, so the Step-I
search evaluates candidates on the 4x4 two-qubit marginal: rho_jk is
computed once per (pair, iteration) at O(2^N) and every Nelder-Mead
objective evaluation is 4x4 arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._seeding import substream
from .entanglement import (
    entanglement_total,
    product_params,
    renyi2_purity,
)
from .optimize import OptResult, adam, adjoint_gradient, nelder_mead, paramshift_gradient
from .statevector import (
    Circuit,
    GateOp,
    StateVector,
    apply_circuit,
    apply_gate_inplace,
    fidelity,
    rdm1,
    rdm2,
    shot_estimate,
)
from .io import circuit_to_json


@dataclass(frozen=True)
class AqerConfig:
    T: int
    T3: int = 2000
    lr: float = 1e-2
    nm_tol: float = 1e-4
    nm_max_iter: int = 500
    shots: int | None = None
    seed: int = 0
    pair_set: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.T < 0 or self.T3 < 0:
            raise ValueError("T and T3 must be >= 0")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shot mode requires shots >= 1")

    def to_json_dict(self) -> dict:
        return {
            "T": self.T, "T3": self.T3, "lr": self.lr,
            "nm_tol": self.nm_tol, "nm_max_iter": self.nm_max_iter,
            "shots": self.shots, "seed": self.seed,
            "pair_set": None if self.pair_set is None
            else [list(p) for p in self.pair_set],
        }


@dataclass(frozen=True)
class Block:
    """One Step-I unit: pair (j, k) and its five angles
    (RZ j, RY j, RZ k, RY k, RZZ)."""
    pair: tuple[int, int]
    angles: tuple[float, float, float, float, float]


@dataclass
class AqerResult:
    circuit: Circuit
    theta_star: np.ndarray
    s_initial: float
    s_trace: list[float]
    loss_trace: list[tuple[int, float]]
    infidelity_initial: float
    infidelity_final: float
    G: int
    config: AqerConfig
    blocks: list[Block] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "s_initial": self.s_initial,
            "s_trace": list(map(float, self.s_trace)),
            "loss_trace": [[int(i), float(v)] for i, v in self.loss_trace],
            "infidelity_initial": float(self.infidelity_initial),
            "infidelity_final": float(self.infidelity_final),
            "G": int(self.G),
            "circuit": circuit_to_json(self.circuit),
            "theta_star": [float(x) for x in self.theta_star],
        }


def all_pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple((j, k) for j in range(n) for k in range(j + 1, n))


def _normalize_pair_set(pair_set, n: int) -> tuple[tuple[int, int], ...]:
    if pair_set is None:
        return all_pairs(n)
    out = []
    for j, k in pair_set:
        j, k = int(j), int(k)
        if j == k or not (0 <= j < n and 0 <= k < n):
            raise ValueError(f"invalid qubit pair ({j}, {k})")
        out.append((min(j, k), max(j, k)))
    return tuple(sorted(set(out)))


# ---------------------------------------------------------------------------
# Step I

def block_matrix4(angles) -> np.ndarray:
    """4x4 matrix of one block in the m = bit(j) + 2*bit(k) basis."""
    a1, a2, a3, a4, a5 = angles
    pj = complex(math.cos(0.5 * a1), -math.sin(0.5 * a1))
    pk = complex(math.cos(0.5 * a3), -math.sin(0.5 * a3))
    c2, s2 = math.cos(0.5 * a2), math.sin(0.5 * a2)
    c4, s4 = math.cos(0.5 * a4), math.sin(0.5 * a4)
    # Mq = RY(a_y) @ RZ(a_z) on one qubit
    mj = np.array([[c2 * pj, -s2 * pj.conjugate()],
                   [s2 * pj, c2 * pj.conjugate()]])
    mk = np.array([[c4 * pk, -s4 * pk.conjugate()],
                   [s4 * pk, c4 * pk.conjugate()]])
    b = np.kron(mk, mj)  # j is the low bit of m
    p5 = complex(math.cos(0.5 * a5), -math.sin(0.5 * a5))
    q5 = p5.conjugate()
    b[0, :] *= p5
    b[3, :] *= p5
    b[1, :] *= q5
    b[2, :] *= q5
    return b


def _rdm2_pair(amps: np.ndarray, n: int, j: int, k: int) -> np.ndarray:
    """Two-qubit marginal in the m = bit(j) + 2*bit(k) basis."""
    return rdm2(StateVector(n, amps, copy=False, check=False), j, k)


def _touched_purities(rho4: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Purities of the two single-qubit marginals of b rho4 b^dagger."""
    rp = b @ rho4 @ b.conj().T
    # trace out k (high bit): rho_j[a, b] = rp[a, b] + rp[a+2, b+2]
    j00 = (rp[0, 0] + rp[2, 2]).real
    j11 = (rp[1, 1] + rp[3, 3]).real
    j01 = rp[0, 1] + rp[2, 3]
    # trace out j (low bit)
    k00 = (rp[0, 0] + rp[1, 1]).real
    k11 = (rp[2, 2] + rp[3, 3]).real
    k01 = rp[0, 2] + rp[1, 3]
    tj = j00 * j00 + j11 * j11 + 2.0 * (j01.real ** 2 + j01.imag ** 2)
    tk = k00 * k00 + k11 * k11 + 2.0 * (k01.real ** 2 + k01.imag ** 2)
    return tj, tk


def _touched_bloch(rho4: np.ndarray, b: np.ndarray):
    """Exact (x, y, z) Bloch components of both touched marginals."""
    rp = b @ rho4 @ b.conj().T
    j10 = rp[1, 0] + rp[3, 2]
    jz = (rp[0, 0] + rp[2, 2] - rp[1, 1] - rp[3, 3]).real
    k10 = rp[2, 0] + rp[3, 1]
    kz = (rp[0, 0] + rp[1, 1] - rp[2, 2] - rp[3, 3]).real
    return ((2.0 * j10.real, 2.0 * j10.imag, jz),
            (2.0 * k10.real, 2.0 * k10.imag, kz))


def _shot_qubit_entropy(bloch, shots: int, rng) -> float:
    x = shot_estimate(min(1.0, max(-1.0, bloch[0])), shots, rng)
    y = shot_estimate(min(1.0, max(-1.0, bloch[1])), shots, rng)
    z = shot_estimate(min(1.0, max(-1.0, bloch[2])), shots, rng)
    r2 = x * x + y * y + z * z
    # PSD projection of the reconstructed 2x2: cap the Bloch radius at 1
    r2 = min(r2, 1.0)
    return renyi2_purity((1.0 + r2) / 2.0)


def _exact_per_qubit_entropies(amps: np.ndarray, n: int) -> np.ndarray:
    out = np.empty(n)
    for q in range(n):
        m = amps.reshape(-1, 2, 1 << q)
        a0 = m[:, 0, :].reshape(-1)
        a1 = m[:, 1, :].reshape(-1)
        p00 = float(np.vdot(a0, a0).real)
        p11 = float(np.vdot(a1, a1).real)
        r10 = complex(np.vdot(a0, a1))  # <1|rho|0>
        t2 = p00 * p00 + p11 * p11 + 2.0 * (abs(r10) ** 2)
        out[q] = renyi2_purity(t2)
    return out


def _apply_block_inplace(amps: np.ndarray, n: int, block: Block) -> None:
    j, k = block.pair
    a1, a2, a3, a4, a5 = block.angles
    apply_gate_inplace(amps, n, GateOp("RZ", (j,), param=a1))
    apply_gate_inplace(amps, n, GateOp("RY", (j,), param=a2))
    apply_gate_inplace(amps, n, GateOp("RZ", (k,), param=a3))
    apply_gate_inplace(amps, n, GateOp("RY", (k,), param=a4))
    apply_gate_inplace(amps, n, GateOp("RZZ", (j, k), param=a5))


def step1(target: StateVector, cfg: AqerConfig):
    """Greedy entanglement reduction.

    Returns (blocks, v_T, s_trace).  Per iteration every candidate pair gets
    a Nelder-Mead run from all-zero angles on the reduced objective; the
    (pair, angles) with minimal total S wins, ties broken by lexicographic
    pair order.  In shot mode the per-qubit entropies entering the objective
    come from binomially sampled <X>, <Y>, <Z>.
    """
    n = target.num_qubits
    pairs = _normalize_pair_set(cfg.pair_set, n)
    if cfg.T > 0 and not pairs:
        raise ValueError("pair_set is empty but T > 0")
    v = target.amplitudes.copy()
    shot_rng = substream(cfg.seed, "step1") if cfg.shots is not None else None
    blocks: list[Block] = []
    s_trace: list[float] = []
    per = _exact_per_qubit_entropies(v, n)
    for _ in range(cfg.T):
        if cfg.shots is not None:
            per_obj = np.empty(n)
            for q in range(n):
                rho = rdm1(StateVector(n, v, copy=False, check=False), q)
                bloch = (2.0 * rho[1, 0].real, 2.0 * rho[1, 0].imag,
                         float((rho[0, 0] - rho[1, 1]).real))
                per_obj[q] = _shot_qubit_entropy(bloch, cfg.shots, shot_rng)
        else:
            per_obj = per
        total_obj = float(np.sum(per_obj))
        best = None  # (value, pair, angles)
        for (j, k) in pairs:
            rho4 = _rdm2_pair(v, n, j, k)
            frozen = total_obj - per_obj[j] - per_obj[k]

            if cfg.shots is None:
                def objective(angles, rho4=rho4, frozen=frozen):
                    tj, tk = _touched_purities(rho4, block_matrix4(angles))
                    return frozen + renyi2_purity(tj) + renyi2_purity(tk)
            else:
                def objective(angles, rho4=rho4, frozen=frozen):
                    bj, bk = _touched_bloch(rho4, block_matrix4(angles))
                    return (frozen
                            + _shot_qubit_entropy(bj, cfg.shots, shot_rng)
                            + _shot_qubit_entropy(bk, cfg.shots, shot_rng))

            res = nelder_mead(objective, np.zeros(5), tol=cfg.nm_tol,
                              max_iter=cfg.nm_max_iter)
            if best is None or res.best_value < best[0]:
                best = (res.best_value, (j, k), tuple(map(float, res.best_params)))
        value, pair, angles = best
        block = Block(pair=pair, angles=angles)
        _apply_block_inplace(v, n, block)
        blocks.append(block)
        per = _exact_per_qubit_entropies(v, n)
        s_trace.append(value if cfg.shots is not None else float(np.sum(per)))
    v_T = StateVector(n, v, copy=False, check=False)
    return blocks, v_T, s_trace


# ---------------------------------------------------------------------------
# Step II

def step2(v_T: StateVector, shots: int | None = None,
          rng: np.random.Generator | None = None):
    """Closed-form per-qubit product parameters (beta_n, gamma_n).

    Exact mode reads the single-qubit marginals; shot mode reconstructs them
    from sampled Pauli expectations (rho00 = (1+<Z>)/2, rho10 = (<X>+i<Y>)/2)
    projected back to a valid state.
    """
    n = v_T.num_qubits
    beta = np.empty(n)
    gamma = np.empty(n)
    for q in range(n):
        rho = rdm1(v_T, q)
        if shots is not None:
            x = shot_estimate(min(1.0, max(-1.0, 2.0 * rho[1, 0].real)), shots, rng)
            y = shot_estimate(min(1.0, max(-1.0, 2.0 * rho[1, 0].imag)), shots, rng)
            z = shot_estimate(min(1.0, max(-1.0, float((rho[0, 0] - rho[1, 1]).real))),
                              shots, rng)
            r = math.sqrt(x * x + y * y + z * z)
            if r > 1.0:  # PSD projection: cap the Bloch radius
                x, y, z = x / r, y / r, z / r
            rho = np.array([[(1.0 + z) / 2.0, (x - 1j * y) / 2.0],
                            [(x + 1j * y) / 2.0, (1.0 - z) / 2.0]])
        beta[q], gamma[q] = product_params(rho)
    return beta, gamma


# ---------------------------------------------------------------------------
# Step III

def build_loader_circuit(n: int, blocks: list[Block], beta, gamma):
    """Loader circuit V_T^dagger W with one slot per op, plus theta_init.

    Op order: per qubit RY(gamma_n), RZ(beta_n); then blocks T..1 adjointed
    (reverse gate order, negated angles).  Slots are assigned in op order,
    so theta has 2N product-state angles followed by 5 per block.
    """
    circ = Circuit(num_qubits=n)
    theta: list[float] = []
    for q in range(n):
        circ.append(GateOp("RY", (q,)), slot=len(theta))
        theta.append(float(gamma[q]))
        circ.append(GateOp("RZ", (q,)), slot=len(theta))
        theta.append(float(beta[q]))
    for block in reversed(blocks):
        j, k = block.pair
        a1, a2, a3, a4, a5 = block.angles
        for kind, qs, ang in (("RZZ", (j, k), -a5), ("RY", (k,), -a4),
                              ("RZ", (k,), -a3), ("RY", (j,), -a2),
                              ("RZ", (j,), -a1)):
            circ.append(GateOp(kind, qs), slot=len(theta))
            theta.append(float(ang))
    return circ, np.array(theta)


def step3(target: StateVector, blocks: list[Block], beta, gamma,
          cfg: AqerConfig):
    """Fine-tune all loader angles against the infidelity.

    Exact mode uses the adjoint gradient; shot mode uses parameter-shift
    with sampled fidelities, with the best iterate selected by an exact
    re-evaluation (simulator shortcut standing in for a swap test).
    """
    n = target.num_qubits
    circ, theta0 = build_loader_circuit(n, blocks, beta, gamma)

    def exact_loss(theta):
        return adjoint_gradient(target, circ, theta)[0]

    if cfg.T3 == 0:
        return circ, theta0, [(0, exact_loss(theta0))]
    if cfg.shots is None:
        res = adam(lambda th: adjoint_gradient(target, circ, th),
                   theta0, lr=cfg.lr, iters=cfg.T3)
    else:
        rng = substream(cfg.seed, "step3")
        res = adam(lambda th: paramshift_gradient(target, circ, th,
                                                  shots=cfg.shots, rng=rng),
                   theta0, lr=cfg.lr, iters=cfg.T3, select_fn=exact_loss)
    return circ, res.best_params, res.trace


def run_aqer(target: StateVector, cfg: AqerConfig) -> AqerResult:
    """Full three-step run; the loaded state is circuit(theta_star)|0...0>."""
    n = target.num_qubits
    s_initial = entanglement_total(target.amplitudes, n)
    blocks, v_T, s_trace = step1(target, cfg)
    shots_rng = substream(cfg.seed, "shots") if cfg.shots is not None else None
    beta, gamma = step2(v_T, shots=cfg.shots, rng=shots_rng)
    circ, theta0 = build_loader_circuit(n, blocks, beta, gamma)
    loaded0 = apply_circuit(StateVector.zero(n), circ, theta0)
    infidelity_initial = 1.0 - fidelity(target, loaded0)
    circ, theta_star, loss_trace = step3(target, blocks, beta, gamma, cfg)
    loaded = apply_circuit(StateVector.zero(n), circ, theta_star)
    infidelity_final = 1.0 - fidelity(target, loaded)
    return AqerResult(
        circuit=circ,
        theta_star=np.asarray(theta_star, dtype=float),
        s_initial=float(s_initial),
        s_trace=s_trace,
        loss_trace=loss_trace,
        infidelity_initial=float(infidelity_initial),
        infidelity_final=float(infidelity_final),
        G=circ.two_qubit_gate_count(),
        config=cfg,
        blocks=blocks,
    )
