"""QSV1 state files and circuit JSON.

QSV1 layout: bytes 0-3 ASCII "QSV1", byte 4 format version (1), bytes 5-8
little-endian u32 qubit count, then 2^N records of (re: f64 LE, im: f64 LE).
Qubit 0 is the least significant bit of the record index.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .statevector import Circuit, GateOp, StateVector

QSV_MAGIC = b"QSV1"
QSV_VERSION = 1


class FormatError(ValueError):
    pass


def write_state(path: str | Path, state: StateVector) -> None:
    amps = np.ascontiguousarray(state.amplitudes, dtype="<c16")
    with open(path, "wb") as f:
        f.write(QSV_MAGIC)
        f.write(bytes([QSV_VERSION]))
        f.write(struct.pack("<I", state.num_qubits))
        f.write(amps.tobytes())


def read_state(path: str | Path) -> StateVector:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 9 or raw[:4] != QSV_MAGIC:
        raise FormatError(f"{path}: bad magic, not a QSV1 file")
    if raw[4] != QSV_VERSION:
        raise FormatError(f"{path}: unsupported format version {raw[4]}")
    (n,) = struct.unpack("<I", raw[5:9])
    if n < 1:
        raise FormatError(f"{path}: invalid qubit count {n}")
    payload = raw[9:]
    expected = (1 << n) * 16
    if len(payload) != expected:
        raise FormatError(
            f"{path}: truncated payload, expected {expected} bytes for "
            f"{n} qubits, got {len(payload)}")
    amps = np.frombuffer(payload, dtype="<c16").astype(complex)
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > 1e-12:
        raise FormatError(f"{path}: payload not normalized (norm = {norm!r})")
    return StateVector(n, amps, copy=False, check=False)


def _matrix_to_json(m: np.ndarray) -> list[list[float]]:
    return [[float(x.real), float(x.imag)] for x in m.reshape(-1)]


def _matrix_from_json(pairs) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    if flat.shape[0] != 16:
        raise FormatError("U2Q matrix must have 16 [re, im] entries")
    return flat.reshape(4, 4)


def circuit_to_json(circuit: Circuit) -> dict:
    ops = []
    for i, op in enumerate(circuit.ops):
        ops.append({
            "kind": op.kind,
            "qubits": list(op.qubits),
            "param": None if op.param is None else float(op.param),
            "slot": circuit.param_slots.get(i),
            "matrix": None if op.matrix is None else _matrix_to_json(op.matrix),
        })
    return {"num_qubits": circuit.num_qubits, "ops": ops}


def circuit_from_json(doc: dict) -> Circuit:
    try:
        n = int(doc["num_qubits"])
        raw_ops = doc["ops"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"circuit JSON missing field: {exc}") from exc
    ops: list[GateOp] = []
    slots: dict[int, int] = {}
    for i, o in enumerate(raw_ops):
        matrix = o.get("matrix")
        ops.append(GateOp(
            kind=o["kind"],
            qubits=tuple(o["qubits"]),
            param=o.get("param"),
            matrix=None if matrix is None else _matrix_from_json(matrix),
        ))
        if o.get("slot") is not None:
            slots[i] = int(o["slot"])
    return Circuit(num_qubits=n, ops=ops, param_slots=slots)


def write_circuit(path: str | Path, circuit: Circuit) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(circuit_to_json(circuit), f, indent=1)
        f.write("\n")


def read_circuit(path: str | Path) -> Circuit:
    with open(path, "r", encoding="utf-8") as f:
        return circuit_from_json(json.load(f))
