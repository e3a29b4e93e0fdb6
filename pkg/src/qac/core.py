"""Statevector kernel: gate definitions, circuits, simulation and shot sampling.

Basis ordering follows the usual little-endian convention: qubit 0 is the
least significant bit of a basis index, and counts keys print the
highest-index classical bit first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    ArgumentError,
    NoClbitsError,
    NoMeasureError,
    RangeError,
    UnitarityError,
)

MAX_QUBITS = 20
UNITARITY_TOL = 1e-6

SINGLE_QUBIT_GATES = ("x", "y", "z", "h", "s", "t")
ROTATION_GATES = ("rx", "ry", "rz")
CONTROLLED_ROTATION_GATES = ("crx", "cry", "crz")
GATE_ARITY = {
    **{g: 1 for g in SINGLE_QUBIT_GATES + ROTATION_GATES},
    "cx": 2,
    "cz": 2,
    "swap": 2,
    **{g: 2 for g in CONTROLLED_ROTATION_GATES},
    "ccx": 3,
    "cccx": 4,
    "m": 1,
}
ANGLE_GATES = frozenset(ROTATION_GATES + CONTROLLED_ROTATION_GATES)
GATE_KINDS = frozenset(GATE_ARITY) | {"unitary"}

Seed = Union[int, np.random.Generator, None]


def make_rng(seed: Seed = None) -> np.random.Generator:
    """Return a PCG64-backed generator (64-bit output, 128-bit state).

    Passing an existing Generator returns it unchanged so callers can thread
    one stream through several sampling calls.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


# -- gate matrices ---------------------------------------------------------
# For a k-qubit matrix, bit j of the row/column index belongs to qubits[j].

_SQRT1_2 = 1 / math.sqrt(2)
_FIXED = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "z":
        return np.array(
            [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
        )
    raise ArgumentError(f"unknown rotation axis {axis!r}")


def controlled(u: np.ndarray, num_controls: int) -> np.ndarray:
    """Controls occupy the low bits, the target the highest bit."""
    dim = 2 ** (num_controls + 1)
    out = np.eye(dim, dtype=complex)
    mask = 2**num_controls - 1
    # rows/cols with all control bits set, target bit 0 or 1
    idx = [mask, mask | (1 << num_controls)]
    out[np.ix_(idx, idx)] = u
    return out


def gate_matrix(op: "GateOp") -> np.ndarray:
    kind = op.kind
    if kind in _FIXED:
        return _FIXED[kind]
    if kind in ROTATION_GATES:
        return rotation_matrix(kind[1], op.angle)
    if kind in CONTROLLED_ROTATION_GATES:
        return controlled(rotation_matrix(kind[2], op.angle), 1)
    if kind == "cx":
        return controlled(_FIXED["x"], 1)
    if kind == "cz":
        return controlled(_FIXED["z"], 1)
    if kind == "ccx":
        return controlled(_FIXED["x"], 2)
    if kind == "cccx":
        return controlled(_FIXED["x"], 3)
    if kind == "unitary":
        return np.array(op.matrix, dtype=complex)
    raise ArgumentError(f"gate {kind!r} has no matrix")


def check_unitary(matrix, tol: float = UNITARITY_TOL) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"unitary must be a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise UnitarityError("matrix contains non-finite entries")
    err = np.abs(m.conj().T @ m - np.eye(m.shape[0]))
    if err.max(initial=0.0) > tol:
        raise UnitarityError(
            f"matrix is not unitary (max |U^dag U - I| = {err.max():.3g})"
        )
    return m


def unitary_from_values(values: Sequence[float]) -> tuple[np.ndarray, int]:
    """Decode the flat unitary wire format into (matrix, num_qubits).

    Accepts row-major interleaved (re, im) pairs of length 2*(2^k)^2, or an
    all-real row-major list of length (2^k)^2.
    """
    n = len(values)
    for k in range(1, MAX_QUBITS + 1):
        dim2 = 4**k
        if n == dim2:
            m = np.asarray(values, dtype=float).astype(complex)
            return m.reshape(2**k, 2**k), k
        if n == 2 * dim2:
            pairs = np.asarray(values, dtype=float).reshape(-1, 2)
            m = pairs[:, 0] + 1j * pairs[:, 1]
            return m.reshape(2**k, 2**k), k
        if dim2 > n:
            break
    raise ArgumentError(
        f"unitary needs (2^k)^2 real values or 2*(2^k)^2 interleaved values, got {n}"
    )


# -- circuit model -----------------------------------------------------------


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple[int, ...]
    angle: Optional[float] = None
    matrix: Optional[tuple[tuple[complex, ...], ...]] = None
    clbit: Optional[int] = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ArgumentError(f"unknown gate {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if any(q < 0 for q in qubits):
            raise RangeError(f"negative qubit index in {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ArgumentError(f"repeated qubit in {self.kind} {qubits}")

        if self.kind == "unitary":
            if self.matrix is None:
                raise ArgumentError("unitary gate requires a matrix")
            m = check_unitary(self.matrix)
            if m.shape[0] != 2 ** len(qubits):
                raise ArgumentError(
                    f"{m.shape[0]}x{m.shape[0]} matrix does not act on {len(qubits)} qubits"
                )
            object.__setattr__(
                self, "matrix", tuple(tuple(complex(v) for v in row) for row in m)
            )
        else:
            if self.matrix is not None:
                raise ArgumentError(f"gate {self.kind!r} does not take a matrix")
            if len(qubits) != GATE_ARITY[self.kind]:
                raise ArgumentError(
                    f"gate {self.kind!r} takes {GATE_ARITY[self.kind]} qubit(s), got {len(qubits)}"
                )

        if self.kind in ANGLE_GATES:
            if self.angle is None or not math.isfinite(self.angle):
                raise ArgumentError(f"gate {self.kind!r} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ArgumentError(f"gate {self.kind!r} does not take an angle")

        if self.kind == "m":
            if self.clbit is None:
                raise ArgumentError("measurement needs a classical bit")
            if self.clbit < 0:
                raise RangeError(f"negative classical bit {self.clbit}")
            object.__setattr__(self, "clbit", int(self.clbit))
        elif self.clbit is not None:
            raise ArgumentError(f"gate {self.kind!r} does not take a classical bit")

    @property
    def is_measurement(self) -> bool:
        return self.kind == "m"

    def to_matrix(self) -> np.ndarray:
        return gate_matrix(self)


@dataclass
class QuantumCircuit:
    name: str
    num_qubits: int
    num_clbits: int = 0
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        if self.num_qubits < 1 or self.num_clbits < 0:
            raise ArgumentError(
                f"circuit {self.name!r} needs >= 1 qubit and >= 0 clbits, "
                f"got {self.num_qubits}/{self.num_clbits}"
            )
        if self.num_qubits > MAX_QUBITS:
            raise RangeError(
                f"circuit {self.name!r} asks for {self.num_qubits} qubits; the cap is {MAX_QUBITS}"
            )
        ops, self.ops = list(self.ops), []
        self._measured: set[int] = set()
        for op in ops:
            self.append(op)

    def validate(self, op: GateOp) -> None:
        """Raise if `op` cannot be appended; never mutates the circuit."""
        for q in op.qubits:
            if q >= self.num_qubits:
                raise RangeError(
                    f"qubit {q} is outside of range for circuit {self.name!r} "
                    f"({self.num_qubits} qubits)"
                )
        if op.is_measurement:
            if self.num_clbits == 0:
                raise NoClbitsError(
                    f"circuit {self.name!r} has no classical bits to store measurements"
                )
            if op.clbit >= self.num_clbits:
                raise RangeError(
                    f"classical bit {op.clbit} is outside of range for circuit "
                    f"{self.name!r} ({self.num_clbits} clbits)"
                )
        else:
            hit = self._measured.intersection(op.qubits)
            if hit:
                raise ArgumentError(
                    f"gate {op.kind!r} after measurement of qubit {min(hit)}: "
                    "mid-circuit measurement is not supported"
                )

    def append(self, op: GateOp) -> "QuantumCircuit":
        self.validate(op)
        self.ops.append(op)
        if op.is_measurement:
            self._measured.add(op.qubits[0])
        return self

    def extend(self, ops: Iterable[GateOp]) -> "QuantumCircuit":
        # validate on a scratch copy so a failure leaves self untouched
        scratch = self.copy()
        for op in ops:
            scratch.append(op)
        self.ops, self._measured = scratch.ops, scratch._measured
        return self

    def copy(self, name: Optional[str] = None) -> "QuantumCircuit":
        qc = QuantumCircuit.__new__(QuantumCircuit)
        qc.name = self.name if name is None else name
        qc.num_qubits = self.num_qubits
        qc.num_clbits = self.num_clbits
        qc.ops = list(self.ops)
        qc._measured = set(self._measured)
        return qc

    # builder shorthands
    def gate(self, kind: str, *qubits: int, angle: Optional[float] = None):
        return self.append(GateOp(kind, qubits, angle=angle))

    def h(self, q):
        return self.gate("h", q)

    def x(self, q):
        return self.gate("x", q)

    def cx(self, c, t):
        return self.gate("cx", c, t)

    def measure(self, q: int, c: int):
        return self.append(GateOp("m", (q,), clbit=c))

    def measure_all(self):
        for q in range(self.num_qubits):
            self.measure(q, q)
        return self

    def unitary(self, matrix, qubits: Sequence[int]):
        m = np.asarray(matrix, dtype=complex)
        return self.append(GateOp("unitary", tuple(qubits), matrix=m))

    @property
    def has_measurements(self) -> bool:
        return any(op.is_measurement for op in self.ops)


# -- simulation --------------------------------------------------------------


def zero_state(num_qubits: int) -> np.ndarray:
    state = np.zeros(2**num_qubits, dtype=complex)
    state[0] = 1.0
    return state


def apply_gate(state: np.ndarray, op: GateOp) -> np.ndarray:
    """Apply a non-measurement op and return a new statevector."""
    if op.is_measurement:
        raise ArgumentError("apply_gate cannot apply a measurement")
    n = int(state.size).bit_length() - 1
    if state.size != 2**n:
        raise ArgumentError(f"statevector length {state.size} is not a power of two")
    for q in op.qubits:
        if q >= n:
            raise RangeError(f"qubit {q} is outside of range for a {n}-qubit state")
    u = gate_matrix(op)
    if op.kind == "unitary":
        check_unitary(u)
    k = len(op.qubits)
    # tensor axis j of the reshaped state is qubit n-1-j
    psi = state.reshape((2,) * n)
    targets = [n - 1 - q for q in reversed(op.qubits)]
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, psi, axes=(list(range(k, 2 * k)), targets))
    out = np.moveaxis(out, list(range(k)), targets)
    return np.ascontiguousarray(out).reshape(-1)


def run_statevector(circuit: QuantumCircuit) -> np.ndarray:
    state = zero_state(circuit.num_qubits)
    for op in circuit.ops:
        if not op.is_measurement:
            state = apply_gate(state, op)
    return state


def probabilities(state: np.ndarray) -> np.ndarray:
    return np.abs(state) ** 2


def measurement_map(circuit: QuantumCircuit) -> dict[int, int]:
    """clbit -> qubit; a later measurement into the same clbit wins."""
    return {op.clbit: op.qubits[0] for op in circuit.ops if op.is_measurement}


def outcome_probabilities(
    circuit: QuantumCircuit, state: Optional[np.ndarray] = None
) -> np.ndarray:
    """Probability of every classical register value, indexed by its integer."""
    if state is None:
        state = run_statevector(circuit)
    probs = probabilities(state)
    basis = np.arange(probs.size)
    pattern = np.zeros(probs.size, dtype=np.int64)
    for c, q in measurement_map(circuit).items():
        pattern |= ((basis >> q) & 1) << c
    return np.bincount(pattern, weights=probs, minlength=2**circuit.num_clbits)


def _check_sampleable(circuit: QuantumCircuit, shots: int) -> None:
    if circuit.num_clbits == 0:
        raise NoClbitsError(
            f"circuit {circuit.name!r} has no classical bits; cannot sample"
        )
    if not circuit.has_measurements:
        raise NoMeasureError(
            f"cannot run a simulation without measurement gates (circuit {circuit.name!r})"
        )
    if int(shots) < 1:
        raise ArgumentError(f"shots must be >= 1, got {shots}")


def draw_outcomes(circuit: QuantumCircuit, shots: int, seed: Seed = None) -> np.ndarray:
    """Draw `shots` independent classical register values (as integers)."""
    _check_sampleable(circuit, shots)
    rng = make_rng(seed)
    cdf = np.cumsum(outcome_probabilities(circuit))
    cdf /= cdf[-1]
    draws = np.searchsorted(cdf, rng.random(int(shots)), side="right")
    # guards the u -> 1 edge against float rounding in the cdf
    return np.minimum(draws, cdf.size - 1)


def bitstring(value: int, width: int) -> str:
    return format(int(value), f"0{width}b")


def sample_counts(circuit: QuantumCircuit, shots: int, seed: Seed = None) -> dict[str, int]:
    draws = draw_outcomes(circuit, shots, seed)
    tallies = np.bincount(draws, minlength=2**circuit.num_clbits)
    width = circuit.num_clbits
    return {bitstring(v, width): int(tallies[v]) for v in np.flatnonzero(tallies)}


def sample_memory(circuit: QuantumCircuit, shots: int, seed: Seed = None) -> list[str]:
    draws = draw_outcomes(circuit, shots, seed)
    width = circuit.num_clbits
    labels = {int(v): bitstring(v, width) for v in np.unique(draws)}
    return [labels[v] for v in draws.tolist()]


def counts_from_memory(memory: Iterable[str]) -> dict[str, int]:
    tally: dict[str, int] = {}
    for rec in memory:
        tally[rec] = tally.get(rec, 0) + 1
    return dict(sorted(tally.items()))


def format_counts(counts: dict[str, int]) -> str:
    """Alternating `state count` pairs, e.g. ``"0 64 1 63"``."""
    return " ".join(f"{k} {v}" for k, v in sorted(counts.items()))


def parse_counts(text: str) -> dict[str, int]:
    parts = text.split()
    if len(parts) % 2:
        raise ArgumentError(f"counts text has an odd number of items: {text!r}")
    return {parts[i]: int(parts[i + 1]) for i in range(0, len(parts), 2)}
