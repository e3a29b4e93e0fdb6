"""Grover-amplified first-order Markov pitch sequencing.

Each step extracts the transition-table row of the current pitch, marks the
allowed next pitches with a diagonal +/-1 oracle, runs one Grover iteration
over ``n`` qubits, samples it and takes the most frequent basis state as the
next pitch.

Transition tables are JSON documents::

    {"labels": [{"name": "C", "midi": 60}, ...],
     "matrix": [[0, 0, 1, ...], ...]}

``matrix[i][j] == 1`` allows label j to follow label i.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import core
from .core import GateOp, QuantumCircuit
from .errors import (
    ArgumentError,
    ProportionError,
    QacError,
    UndefinedNameError,
    UnsupportedError,
)

MIN_QUBITS, MAX_QUBITS = 2, 4
MAX_RESAMPLES = 8
_MCX = {2: "cx", 3: "ccx", 4: "cccx"}


@dataclass(frozen=True)
class TransitionTable:
    labels: tuple[tuple[str, int], ...]
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        labels = tuple((str(name), int(midi)) for name, midi in self.labels)
        matrix = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "matrix", matrix)
        k = len(labels)
        if k < 2:
            raise ArgumentError("a transition table needs at least 2 labels")
        if len({name for name, _ in labels}) != k:
            raise ArgumentError("label names must be unique")
        for name, midi in labels:
            if not 0 <= midi <= 127:
                raise ArgumentError(f"label {name!r} has MIDI note {midi} outside 0..127")
        if len(matrix) != k or any(len(row) != k for row in matrix):
            raise ArgumentError(f"matrix must be {k}x{k} to match the labels")
        for (name, _), row in zip(labels, matrix):
            if any(v not in (0, 1) for v in row):
                raise ArgumentError(f"row {name!r} has entries outside {{0, 1}}")
            if not any(row):
                raise ArgumentError(f"row {name!r} is a dead end (no allowed successor)")

    def __len__(self):
        return len(self.labels)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.labels]

    def index(self, label: str) -> int:
        for i, (name, _) in enumerate(self.labels):
            if name == label:
                return i
        raise UndefinedNameError(f"label {label!r} is not in the transition table")

    @classmethod
    def from_dict(cls, data: dict) -> "TransitionTable":
        try:
            labels = [(item["name"], item["midi"]) for item in data["labels"]]
            matrix = data["matrix"]
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed transition table: missing {exc}") from None
        return cls(tuple(labels), tuple(tuple(row) for row in matrix))

    def to_dict(self) -> dict:
        return {
            "labels": [{"name": n, "midi": m} for n, m in self.labels],
            "matrix": [list(row) for row in self.matrix],
        }

    @classmethod
    def load(cls, path) -> "TransitionTable":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class SequencerConfig:
    start_label: str
    num_loops: int
    period_ms: int = 150
    shots: int = 100
    seed: Optional[int] = None

    def __post_init__(self):
        if self.num_loops < 0:
            raise ArgumentError("num_loops must be >= 0")
        if self.period_ms < 1 or self.shots < 1:
            raise ArgumentError("period_ms and shots must be positive")


@dataclass(frozen=True)
class NoteEvent:
    t_ms: int
    midi_note: int
    label: str
    winning_state: str
    winning_count: int

    def csv(self) -> str:
        return f"{self.t_ms},{self.midi_note},{self.label},{self.winning_state},{self.winning_count}"


class ResampleSignal(QacError):
    """The winning basis state lies in the padding beyond the label list."""

    def __init__(self, state: str, count: int):
        super().__init__(f"winning state {state} has no label")
        self.state = state
        self.count = count


class SequencerAborted(QacError):
    """A step failed; ``events`` holds everything emitted before it."""

    def __init__(self, events, cause):
        super().__init__(f"sequencer aborted after {len(events)} event(s): {cause}")
        self.events = list(events)
        self.cause = cause


# -- circuit synthesis ---------------------------------------------------------


def get_target_states(table: TransitionTable, current_label: str) -> list[int]:
    return list(table.matrix[table.index(current_label)])


def states2qubits(num_states: int) -> int:
    if num_states < 2:
        raise ArgumentError("BMA needs at least 2 states; a 1 qubit version cannot exist")
    return (int(num_states) - 1).bit_length()


def circuit_qubits(num_labels: int) -> int:
    """Qubits used for a table; two-label tables are lifted to two qubits."""
    return max(MIN_QUBITS, states2qubits(num_labels))


def check_proportion(targets: Sequence[int], n: int) -> str:
    """'warning' when marked states make up half or more of all 2^n states."""
    return "warning" if 2 * sum(targets) >= 2**n else "ok"


def build_oracle_matrix(targets: Sequence[int], n: int) -> np.ndarray:
    if len(targets) > 2**n:
        raise ArgumentError(f"{len(targets)} states do not fit in {n} qubits")
    if not any(targets):
        raise ArgumentError("oracle needs at least one target state")
    diag = np.ones(2**n)
    for i, flag in enumerate(targets):
        if flag:
            diag[i] = -1.0
    return np.diag(diag)


def _grover_ops(targets: Sequence[int], n: int) -> list[tuple]:
    """(kind, qubits, payload) triples shared by the circuit and message paths."""
    if not MIN_QUBITS <= n <= MAX_QUBITS:
        raise UnsupportedError(
            f"BMA circuits are built for {MIN_QUBITS}..{MAX_QUBITS} qubits, got {n}"
        )
    oracle = build_oracle_matrix(targets, n)
    if check_proportion(targets, n) == "warning":
        raise ProportionError(
            f"{sum(targets)} of {2**n} states are targets; the proportion must be below 1/2"
        )
    every = range(n)
    top = n - 1
    ops = [("h", (q,), None) for q in every]
    ops.append(("unitary", tuple(every), oracle))
    ops += [("h", (q,), None) for q in every]
    ops += [("x", (q,), None) for q in every]
    ops.append(("h", (top,), None))
    ops.append((_MCX[n], tuple(range(top)) + (top,), None))
    ops.append(("h", (top,), None))
    ops += [("x", (q,), None) for q in every]
    ops += [("h", (q,), None) for q in every]
    ops += [("m", (q,), q) for q in every]
    return ops


def build_bma_circuit(targets: Sequence[int], n: int, name: str = "qc") -> QuantumCircuit:
    qc = QuantumCircuit(name, n, n)
    for kind, qubits, payload in _grover_ops(targets, n):
        if kind == "unitary":
            qc.append(GateOp("unitary", qubits, matrix=payload))
        elif kind == "m":
            qc.append(GateOp("m", qubits, clbit=payload))
        else:
            qc.append(GateOp(kind, qubits))
    return qc


def bma_messages(targets: Sequence[int], n: int, shots: int = 100) -> list[str]:
    """The same circuit as command-language messages, as a patch would send them."""
    lines = [f"QuantumCircuit qc {n} {n}", f"Simulator sim qc {shots} 1"]
    for kind, qubits, payload in _grover_ops(targets, n):
        if kind == "unitary":
            values = " ".join(f"{v:g}" for v in payload.real.ravel())
            lines.append(f"qc unitary {values}")
        elif kind == "m":
            lines.append(f"qc m {qubits[0]} {payload}")
        else:
            lines.append(f"qc {kind} " + " ".join(map(str, qubits)))
    lines.append("sim get_counts")
    return lines


# -- note selection and the sequencing loop ------------------------------------


def winning_state(counts: dict[str, int]) -> tuple[str, int]:
    """Highest tally; ties go to the smallest decimal value."""
    if not counts:
        raise ArgumentError("counts are empty")
    state = min(counts, key=lambda s: (-counts[s], int(s, 2)))
    return state, counts[state]


def calc_next_note(counts: dict[str, int], table: TransitionTable) -> tuple[str, int, str]:
    state, count = winning_state(counts)
    index = int(state, 2)
    if index >= len(table):
        raise ResampleSignal(state, count)
    name, midi = table.labels[index]
    return name, midi, state


def next_event(
    table: TransitionTable,
    label: str,
    rng: np.random.Generator,
    shots: int = 100,
    t_ms: int = 0,
    _cache: Optional[dict] = None,
) -> NoteEvent:
    """One sequencing step from `label`, advancing `rng`."""
    n = circuit_qubits(len(table))
    cache = {} if _cache is None else _cache
    if label not in cache:
        cache[label] = build_bma_circuit(get_target_states(table, label), n)
    qc = cache[label]

    counts = {}
    for _ in range(MAX_RESAMPLES):
        counts = core.sample_counts(qc, shots, rng)
        try:
            name, midi, state = calc_next_note(counts, table)
            return NoteEvent(t_ms, midi, name, state, counts[state])
        except ResampleSignal:
            continue
    # every draw was won by a padded state: take the best labelled one
    in_range = {s: c for s, c in counts.items() if int(s, 2) < len(table)}
    if in_range:
        state, count = winning_state(in_range)
    else:
        flags = get_target_states(table, label)
        state, count = core.bitstring(flags.index(1), n), 0
    name, midi = table.labels[int(state, 2)]
    return NoteEvent(t_ms, midi, name, state, count)


def iter_sequencer(table: TransitionTable, config: SequencerConfig) -> Iterator[NoteEvent]:
    table.index(config.start_label)
    rng = core.make_rng(config.seed)
    cache: dict = {}
    label = config.start_label
    emitted = []
    for k in range(config.num_loops):
        try:
            event = next_event(table, label, rng, config.shots, k * config.period_ms, cache)
        except QacError as exc:
            raise SequencerAborted(emitted, exc) from exc
        emitted.append(event)
        yield event
        label = event.label


def run_sequencer(table: TransitionTable, config: SequencerConfig) -> list[NoteEvent]:
    return list(iter_sequencer(table, config))


def play(
    events: Iterator[NoteEvent],
    emit: Callable[[NoteEvent], None],
    clock: Callable[[], float] = time.monotonic,
    sleep: Callable[[float], None] = time.sleep,
) -> None:
    """Deliver events at their offsets against a monotonic clock."""
    start = clock()
    for event in events:
        delay = start + event.t_ms / 1000 - clock()
        if delay > 0:
            sleep(delay)
        emit(event)
