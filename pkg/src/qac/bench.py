"""Shots-scaling wall-clock benchmark.

Each repetition times the full pipeline (parse or build the circuit,
simulate it, sample ``shots`` outcomes) with ``time.perf_counter``. One
untimed warm-up run precedes every shots level, and rows report the median,
min and max over the repetitions.
"""
from __future__ import annotations

import csv
import gc
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import core
from .core import QuantumCircuit
from .errors import ArgumentError, IoError
from .qasm import parse_qasm

CSV_HEADER = ("shots", "median_ms", "min_ms", "max_ms")


@dataclass(frozen=True)
class BenchSpec:
    shots_list: tuple[int, ...]
    repetitions: int = 5
    csv_path: Optional[str] = None
    qasm_path: Optional[str] = None  # None: one hadamard followed by one measurement
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "shots_list", tuple(int(s) for s in self.shots_list))
        if not self.shots_list:
            raise ArgumentError("shots_list must not be empty")
        if any(s < 1 for s in self.shots_list):
            raise ArgumentError("every shots level must be a positive integer")
        if self.repetitions < 3:
            raise ArgumentError("repetitions must be >= 3 to report a spread")


@dataclass(frozen=True)
class BenchRow:
    shots: int
    median_ms: float
    min_ms: float
    max_ms: float
    times: tuple[float, ...] = field(default=(), repr=False)

    def csv_row(self) -> list:
        return [self.shots, f"{self.median_ms:.6f}", f"{self.min_ms:.6f}", f"{self.max_ms:.6f}"]


def hadamard_circuit() -> QuantumCircuit:
    qc = QuantumCircuit("bench", 1, 1)
    return qc.h(0).measure(0, 0)


def _pipeline(source: Optional[str], shots: int, rng) -> dict[str, int]:
    qc = hadamard_circuit() if source is None else parse_qasm(source)
    return core.sample_counts(qc, shots, rng)


def time_once(source: Optional[str], shots: int, rng) -> float:
    t0 = time.perf_counter()
    _pipeline(source, shots, rng)
    return (time.perf_counter() - t0) * 1000.0


def run_bench(spec: BenchSpec) -> list[BenchRow]:
    source = None
    if spec.qasm_path is not None:
        try:
            source = Path(spec.qasm_path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read {spec.qasm_path}: {exc}") from exc
        parse_qasm(source)  # fail early on bad input
    out = None
    if spec.csv_path is not None:
        try:
            out = open(spec.csv_path, "w", newline="", encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write {spec.csv_path}: {exc}") from exc

    rng = core.make_rng(spec.seed)
    rows = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for shots in spec.shots_list:
            _pipeline(source, shots, rng)
            times = tuple(time_once(source, shots, rng) for _ in range(spec.repetitions))
            rows.append(BenchRow(shots, statistics.median(times), min(times), max(times), times))
        if out is not None:
            write_csv(out, rows)
    finally:
        if gc_was_enabled:
            gc.enable()
        if out is not None:
            out.close()
    return rows


def write_csv(stream, rows: Sequence[BenchRow]) -> None:
    writer = csv.writer(stream)
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_row())


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
