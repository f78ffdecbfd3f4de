"""Renyi-2 entropies, the entanglement measure S, and its infidelity bounds.

The measure S of an N-qubit pure state is the sum over qubits of the
Renyi-2 entropies of the single-qubit marginals; S = 0 iff the state is a
full product state.  For a state with measure S:

    f1(S) = (1 - sqrt(2^(1 - S/N) - 1)) / 2      lower-bounds the infidelity
                                                 to ANY product state,
    f2(S) = (1 - sqrt(2^(1 - S + floor(S)) - 1) + floor(S)) / 2
                                                 is attained by the
                                                 closed-form product state of
                                                 product_params per qubit.

Small-S slopes: f1 -> (ln2 / 2N) S, f2 -> (ln2 / 2) S.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .statevector import StateVector, rdm1

LN2 = math.log(2.0)


@dataclass(frozen=True)
class EntanglementReport:
    per_qubit: np.ndarray      # N Renyi-2 entropies in [0, 1]
    total: float               # S = sum, in [0, N]
    lower_bound: float         # f1(S)
    upper_bound: float         # f2(S), may exceed 1 for large S

    def __post_init__(self):
        if abs(self.total - float(np.sum(self.per_qubit))) >= 1e-10:
            raise ValueError("total does not match the per-qubit sum")
        if self.upper_bound <= 1.0 and self.lower_bound > self.upper_bound + 1e-12:
            raise ValueError("lower bound exceeds upper bound")


def purity(rho: np.ndarray) -> float:
    """Tr[rho^2] for Hermitian rho (Frobenius norm squared)."""
    return float(np.sum(np.abs(rho) ** 2).real)


def renyi2(rho: np.ndarray) -> float:
    """-log2 Tr[rho^2], clamped against <= 1e-10 numerical overshoot."""
    rho = np.asarray(rho)
    d = rho.shape[0]
    if rho.shape != (d, d) or d not in (2, 4):
        raise ValueError("renyi2 expects a 2x2 or 4x4 density matrix")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(f"density matrix trace {tr!r} deviates from 1")
    if np.abs(rho - rho.conj().T).max() > 1e-6:
        raise ValueError("density matrix is not Hermitian")
    t2 = purity(rho)
    lo = 1.0 / d
    if t2 > 1.0 + 1e-10 or t2 < lo - 1e-10:
        raise ValueError(f"purity {t2!r} outside [{lo}, 1] beyond tolerance")
    t2 = min(1.0, max(lo, t2))
    return -math.log2(t2)


def renyi2_purity(t2: float, dim: int = 2) -> float:
    """renyi2 from a precomputed purity (hot-path variant, same clamping)."""
    lo = 1.0 / dim
    if t2 > 1.0 + 1e-10 or t2 < lo - 1e-10:
        raise ValueError(f"purity {t2!r} outside [{lo}, 1] beyond tolerance")
    return -math.log2(min(1.0, max(lo, t2)))


def bound_f1(S: float, N: int) -> float:
    if S < 0:
        raise ValueError("S must be >= 0")
    if S > N + 1e-9:
        raise ValueError(f"S = {S} exceeds qubit count {N}")
    inner = 2.0 ** (1.0 - min(S, N) / N) - 1.0
    return (1.0 - math.sqrt(max(inner, 0.0))) / 2.0


def bound_f2(S: float) -> float:
    if S < 0:
        raise ValueError("S must be >= 0")
    fl = math.floor(S)
    inner = 2.0 ** (1.0 - S + fl) - 1.0
    return (1.0 - math.sqrt(max(inner, 0.0)) + fl) / 2.0


def entanglement_measure(state: StateVector) -> EntanglementReport:
    """Per-qubit Renyi-2 entropies, total S, and the f1/f2 envelope."""
    n = state.num_qubits
    per = np.empty(n)
    for q in range(n):
        per[q] = renyi2(rdm1(state, q))
    total = float(np.sum(per))
    return EntanglementReport(per_qubit=per, total=total,
                              lower_bound=bound_f1(total, n),
                              upper_bound=bound_f2(total))


def entanglement_total(amps: np.ndarray, num_qubits: int) -> float:
    """Total S without report construction (hot-path variant)."""
    total = 0.0
    for q in range(num_qubits):
        m = amps.reshape(-1, 2, 1 << q)
        a0 = m[:, 0, :].reshape(-1)
        a1 = m[:, 1, :].reshape(-1)
        p00 = float(np.vdot(a0, a0).real)
        p11 = float(np.vdot(a1, a1).real)
        r01 = complex(np.vdot(a1, a0))  # <0|rho|1>
        t2 = p00 * p00 + p11 * p11 + 2.0 * (abs(r01) ** 2)
        total += renyi2_purity(t2)
    return total


def max_product_fidelity(rho: np.ndarray) -> float:
    """max over pure |phi> of Tr[|phi><phi| rho] = (1 + sqrt(2^(1-S) - 1))/2.

    Equals the largest eigenvalue of the 2x2 density matrix.
    """
    S = renyi2(rho)
    return (1.0 + math.sqrt(max(2.0 ** (1.0 - S) - 1.0, 0.0))) / 2.0


def product_params(rho: np.ndarray, with_flag: bool = False):
    """Closed-form (beta, gamma) with R_Z(beta) R_Y(gamma)|0> the optimal
    single-qubit approximation of `rho`.

    beta = arg(rho_10); gamma = pi/2 - arcsin((rho00 - rho11) / r) with
    r = sqrt(4|rho10|^2 + (rho00 - rho11)^2).  The fully degenerate case
    rho = I/2 (r = 0) returns (0, 0) by convention; with_flag=True appends
    the degeneracy indicator.
    """
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise ValueError("product_params expects a 2x2 density matrix")
    rho10 = complex(rho[1, 0])
    dz = float((rho[0, 0] - rho[1, 1]).real)
    r = math.sqrt(4.0 * abs(rho10) ** 2 + dz * dz)
    if r < 1e-12:
        return (0.0, 0.0, True) if with_flag else (0.0, 0.0)
    beta = cmath.phase(rho10)
    gamma = math.pi / 2.0 - math.asin(min(1.0, max(-1.0, dz / r)))
    return (beta, gamma, False) if with_flag else (beta, gamma)


def product_state_1q(beta: float, gamma: float) -> np.ndarray:
    """Amplitudes of R_Z(beta) R_Y(gamma) |0>."""
    return np.array([cmath.exp(-0.5j * beta) * math.cos(gamma / 2.0),
                     cmath.exp(0.5j * beta) * math.sin(gamma / 2.0)])


def noisy_bounds(S: float, N: int, L: int, dnorm_M: float, dnorm_N: float) -> tuple[float, float]:
    """Infidelity envelope for L-layer noisy loading/verification circuits.

    lower = f1(S) - (L+1)(dnorm_M + dnorm_N)
    upper = f2(S) + (L+1)(dnorm_M + dnorm_N)
    Values may leave [0, 1]; callers clamp for display only.
    """
    if L < 0 or dnorm_M < 0 or dnorm_N < 0:
        raise ValueError("L and diamond-distance arguments must be >= 0")
    slack = (L + 1) * (dnorm_M + dnorm_N)
    return bound_f1(S, N) - slack, bound_f2(S) + slack


def depol_entropy_bounds(S_rho: float, N: int, p: float) -> tuple[float, float]:
    """Entanglement-measure envelope after rate-p depolarization.

    lower = (1 - p/ln4) S_rho + N p / ln4
    upper = S_rho + N log2(2 / (1 + (1-p)^2))
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if S_rho < -1e-12 or S_rho > N + 1e-9:
        raise ValueError(f"S_rho = {S_rho} outside [0, {N}]")
    ln4 = 2.0 * LN2
    lower = (1.0 - p / ln4) * S_rho + N * p / ln4
    upper = S_rho + N * math.log2(2.0 / (1.0 + (1.0 - p) ** 2))
    return lower, upper
