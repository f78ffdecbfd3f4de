"""Minimizers and gradient engines for the infidelity loss.

nelder_mead and adam are generic; adjoint_gradient and paramshift_gradient
differentiate loss(theta) = 1 - |<target| U(theta) |0...0>|^2 for circuits
whose parameterized gates are RY/RZ/RZZ (generators with +-1/2 eigenvalues).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevector import (
    PARAM_KINDS,
    Circuit,
    StateVector,
    apply_circuit_inplace,
    apply_gate_inplace,
    shot_estimate,
)

# Nelder-Mead coefficients: reflection, expansion, contraction, shrink
_NM_ALPHA, _NM_GAMMA, _NM_RHO, _NM_SIGMA = 1.0, 2.0, 0.5, 0.5
_NM_STEP = 0.1  # initial simplex displacement per coordinate (radians)


@dataclass
class OptResult:
    best_params: np.ndarray
    best_value: float
    iterations: int
    trace: list[tuple[int, float]]


def nelder_mead(objective, x0, tol: float = 1e-4, max_iter: int = 500) -> OptResult:
    """Simplex minimization; stops when the simplex value spread AND its
    coordinate spread both drop below `tol`, or after `max_iter` iterations.

    The initial simplex is x0 plus one vertex per coordinate displaced by
    +0.1.  A value-spread test alone would quit on the exactly flat plateaus
    this loss has at highly entangled states (all single-coordinate
    displacements are invariances there), so the simplex must also have
    geometrically collapsed before we stop.  The trace records the best
    simplex value per iteration and is non-increasing.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")
    dim = x0.shape[0]

    def f(x):
        v = float(objective(x))
        if not math.isfinite(v):
            raise ValueError(f"objective returned non-finite value {v!r}")
        return v

    simplex = [x0.copy()]
    for i in range(dim):
        v = x0.copy()
        v[i] += _NM_STEP
        simplex.append(v)
    values = [f(x) for x in simplex]
    trace: list[tuple[int, float]] = []
    it = 0
    while it < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        trace.append((it, values[0]))
        xspread = max(float(np.max(np.abs(v - simplex[0]))) for v in simplex[1:])
        if values[-1] - values[0] < tol and xspread < tol:
            break
        it += 1
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + _NM_ALPHA * (centroid - worst)
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + _NM_GAMMA * (xr - centroid)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            if fr < values[-1]:
                xc = centroid + _NM_RHO * (xr - centroid)  # outside contraction
            else:
                xc = centroid + _NM_RHO * (worst - centroid)  # inside contraction
            fc = f(xc)
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                best = simplex[0]
                for i in range(1, dim + 1):
                    simplex[i] = best + _NM_SIGMA * (simplex[i] - best)
                    values[i] = f(simplex[i])
    order = np.argsort(values, kind="stable")
    best = int(order[0])
    if not trace or trace[-1][0] != it:
        trace.append((it, values[best]))
    return OptResult(best_params=simplex[best].copy(), best_value=values[best],
                     iterations=it, trace=trace)


def adam(loss_and_grad, x0, lr: float = 1e-2, iters: int = 2000,
         beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
         select_fn=None) -> OptResult:
    """Adam descent returning the best-seen parameters.

    `loss_and_grad` maps params -> (loss, grad).  With a noisy loss the last
    iterate can be worse than an earlier one, so the best iterate is selected
    by `select_fn` (an exact re-evaluation) when given, else by the reported
    loss.  The trace records the reported loss every iteration.
    """
    if lr <= 0:
        raise ValueError("lr must be > 0")
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    trace: list[tuple[int, float]] = []
    best_x = x.copy()
    best_val = math.inf
    for t in range(iters):
        loss, grad = loss_and_grad(x)
        loss = float(loss)
        grad = np.asarray(grad, dtype=float)
        if not math.isfinite(loss) or not np.all(np.isfinite(grad)):
            raise ValueError("non-finite loss or gradient")
        trace.append((t, loss))
        sel = float(select_fn(x)) if select_fn is not None else loss
        if sel < best_val:
            best_val = sel
            best_x = x.copy()
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        mhat = m / (1.0 - beta1 ** (t + 1))
        vhat = v / (1.0 - beta2 ** (t + 1))
        x = x - lr * mhat / (np.sqrt(vhat) + eps)
    # score the final iterate too
    if iters > 0:
        sel = (float(select_fn(x)) if select_fn is not None
               else float(loss_and_grad(x)[0]))
        if sel < best_val:
            best_val, best_x = sel, x.copy()
    else:
        best_val = float(select_fn(x) if select_fn is not None
                         else loss_and_grad(x)[0])
        best_x = x.copy()
    return OptResult(best_params=best_x, best_value=best_val,
                     iterations=iters, trace=trace)


# ---------------------------------------------------------------------------
# gradient engines

def _generator_apply(amps: np.ndarray, n: int, op) -> None:
    """Multiply by the gate's generator G (R = exp(-i theta G)), in place."""
    if op.kind == "RY":
        q = op.qubits[0]
        a = amps.reshape(-1, 2, 1 << q)
        x0 = a[:, 0, :].copy()
        x1 = a[:, 1, :].copy()
        a[:, 0, :] = -0.5j * x1
        a[:, 1, :] = 0.5j * x0
    elif op.kind == "RZ":
        q = op.qubits[0]
        a = amps.reshape(-1, 2, 1 << q)
        a[:, 0, :] *= 0.5
        a[:, 1, :] *= -0.5
    elif op.kind == "RZZ":
        qa, qb = op.qubits
        hi, lo = (qa, qb) if qa > qb else (qb, qa)
        a = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
        a[:, 0, :, 0, :] *= 0.5
        a[:, 1, :, 1, :] *= 0.5
        a[:, 0, :, 1, :] *= -0.5
        a[:, 1, :, 0, :] *= -0.5
    else:  # pragma: no cover
        raise ValueError(f"gate kind {op.kind} has no rotation generator")


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != circuit.num_params:
        raise ValueError(
            f"circuit takes {circuit.num_params} parameters, got {params.shape[0]}")
    return params


def adjoint_gradient(target: StateVector, circuit: Circuit, params) -> tuple[float, np.ndarray]:
    """Exact loss and gradient of 1 - |<target|U(theta)|0...0>|^2.

    One forward pass and one reverse pass with per-gate generator insertion;
    cost O(2^N * P).
    """
    params = _check_params(circuit, params)
    n = circuit.num_qubits
    if target.num_qubits != n:
        raise ValueError("target and circuit qubit counts differ")
    psi = StateVector.zero(n).amplitudes
    apply_circuit_inplace(psi, circuit, params)
    c = np.vdot(target.amplitudes, psi)  # <target|psi>
    loss = 1.0 - float(abs(c) ** 2)
    grad = np.zeros(circuit.num_params)
    if circuit.num_params == 0:
        return loss, grad
    bra = target.amplitudes.copy()
    # invariant entering step i: psi = U_i..U_1|0>, bra = U_{i+1}^..U_M^ |target>
    for i in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[i]
        slot = circuit.param_slots.get(i)
        if slot is not None:
            gpsi = psi.copy()
            _generator_apply(gpsi, n, op)
            dc = -1j * np.vdot(bra, gpsi)  # d<target|U|0>/dtheta_i
            grad[slot] = -2.0 * float((np.conj(c) * dc).real)
        if i > 0:
            ang = circuit.angle_of(i, params) if op.kind in PARAM_KINDS else None
            apply_gate_inplace(psi, n, op, angle=ang, adjoint=True)
            apply_gate_inplace(bra, n, op, angle=ang, adjoint=True)
    return loss, grad


def paramshift_gradient(target: StateVector, circuit: Circuit, params,
                        shots: int | None = None,
                        rng: np.random.Generator | None = None) -> tuple[float, np.ndarray]:
    """Parameter-shift loss and gradient, optionally with simulated shots.

    dF/dtheta_j = F(theta_j + pi/2)/2 - F(theta_j - pi/2)/2 exactly for the
    +-1/2-generator rotations RY/RZ/RZZ.  With `shots`, every fidelity
    evaluation (the loss and each shifted value) is replaced by a binomial
    shot estimate of the overlap-projector expectation; shots=None matches
    adjoint_gradient to 1e-10.

    Evaluations are organized as one forward and one reverse sweep so the
    full gradient costs O(2^N * P) instead of O(2^N * P^2); shifted
    fidelities use F(theta_j +- pi/2) = |<bra_j| R_j(+-pi/2) |psi_j>|^2.
    """
    params = _check_params(circuit, params)
    n = circuit.num_qubits
    if target.num_qubits != n:
        raise ValueError("target and circuit qubit counts differ")
    for i in circuit.param_slots:
        if circuit.ops[i].kind not in PARAM_KINDS:
            raise ValueError(
                f"op {i} ({circuit.ops[i].kind}) unsupported in parameterized position")
    if shots is not None:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        if rng is None:
            raise ValueError("shot mode needs an rng")

    def measure(f_exact: float) -> float:
        if shots is None:
            return f_exact
        # estimate of the +-1 observable 2|t><t| - 1, mapped back to [0, 1]
        e = shot_estimate(2.0 * min(1.0, max(0.0, f_exact)) - 1.0, shots, rng)
        return (1.0 + e) / 2.0

    psi = StateVector.zero(n).amplitudes
    apply_circuit_inplace(psi, circuit, params)
    fid = float(abs(np.vdot(target.amplitudes, psi)) ** 2)
    loss = 1.0 - measure(fid)
    grad = np.zeros(circuit.num_params)
    if circuit.num_params == 0:
        return loss, grad
    bra = target.amplitudes.copy()
    for i in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[i]
        slot = circuit.param_slots.get(i)
        if slot is not None:
            shifted = psi.copy()
            apply_gate_inplace(shifted, n, op, angle=math.pi / 2.0)
            f_plus = measure(float(abs(np.vdot(bra, shifted)) ** 2))
            apply_gate_inplace(shifted, n, op, angle=math.pi, adjoint=True)
            f_minus = measure(float(abs(np.vdot(bra, shifted)) ** 2))
            grad[slot] = -(0.5 * f_plus - 0.5 * f_minus)
        if i > 0:
            ang = circuit.angle_of(i, params) if op.kind in PARAM_KINDS else None
            apply_gate_inplace(psi, n, op, angle=ang, adjoint=True)
            apply_gate_inplace(bra, n, op, angle=ang, adjoint=True)
    return loss, grad
