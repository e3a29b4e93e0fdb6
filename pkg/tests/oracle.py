"""Independent dense-matrix reference simulator used only by the tests.

Builds the full 2^n x 2^n operator for every gate by enumerating basis
columns, with rotations obtained from matrix exponentials of Pauli
generators. Shares no code with qac.core's tensor-contraction path.
"""
import numpy as np
from scipy.linalg import expm

PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.array([[1, 0], [0, -1]], dtype=complex)

BASE = {
    "x": PX,
    "y": PY,
    "z": PZ,
    "h": (PX + PZ) / np.sqrt(2),
    "s": np.diag([1, 1j]),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]),
}


def rotation(axis, theta):
    gen = {"x": PX, "y": PY, "z": PZ}[axis]
    return expm(-0.5j * theta * gen)


def _bit(v, q):
    return (v >> q) & 1


def _set(v, q, b):
    return (v & ~(1 << q)) | (b << q)


def embed(sub, qubits, n):
    """Full operator of a k-qubit matrix whose index bit j is qubits[j]."""
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    k = len(qubits)
    for col in range(dim):
        sub_in = sum(_bit(col, q) << j for j, q in enumerate(qubits))
        for sub_out in range(2**k):
            row = col
            for j, q in enumerate(qubits):
                row = _set(row, q, _bit(sub_out, j))
            full[row, col] += sub[sub_out, sub_in]
    return full


def controlled_full(u, controls, target, n):
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        if all(_bit(col, c) for c in controls):
            b = _bit(col, target)
            for b2 in (0, 1):
                full[_set(col, target, b2), col] += u[b2, b]
        else:
            full[col, col] = 1
    return full


def swap_full(a, b, n):
    dim = 2**n
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        row = _set(_set(col, a, _bit(col, b)), b, _bit(col, a))
        full[row, col] = 1
    return full


def op_matrix(kind, qubits, n, angle=None, matrix=None):
    if kind in BASE:
        return embed(BASE[kind], qubits, n)
    if kind in ("rx", "ry", "rz"):
        return embed(rotation(kind[1], angle), qubits, n)
    if kind in ("crx", "cry", "crz"):
        return controlled_full(rotation(kind[2], angle), qubits[:1], qubits[1], n)
    if kind == "cx":
        return controlled_full(PX, qubits[:1], qubits[1], n)
    if kind == "cz":
        return controlled_full(PZ, qubits[:1], qubits[1], n)
    if kind == "ccx":
        return controlled_full(PX, qubits[:2], qubits[2], n)
    if kind == "cccx":
        return controlled_full(PX, qubits[:3], qubits[3], n)
    if kind == "swap":
        return swap_full(qubits[0], qubits[1], n)
    if kind == "unitary":
        return embed(np.asarray(matrix, dtype=complex), qubits, n)
    raise ValueError(kind)


def oracle_statevector(n, ops):
    """ops: iterable of (kind, qubits, angle, matrix); measurements skipped."""
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1
    total = np.eye(2**n, dtype=complex)
    for kind, qubits, angle, matrix in ops:
        if kind == "m":
            continue
        total = op_matrix(kind, qubits, n, angle, matrix) @ total
    return total @ state


def circuit_ops(circuit):
    return [(op.kind, op.qubits, op.angle, op.matrix) for op in circuit.ops]


def random_unitary(dim, rng):
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
