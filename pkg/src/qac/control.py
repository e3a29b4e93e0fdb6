"""Performance-mapping helpers: a superposition-driven result knob with
interpolation, a probabilistic event gate, and affine range mapping."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import core
from .bma import winning_state
from .core import QuantumCircuit
from .errors import ArgumentError


@dataclass
class SuperpositionDevice:
    """Knob whose target is the top ket of an equal-superposition circuit.

    The knob range [0, 1) is split into 2^num_qubits steps. Triggering
    samples the circuit and starts a linear ramp of ``ramp_ms`` from the
    knob's current value to the new target.
    """

    num_qubits: int = 1
    ramp_ms: int = 0
    shots: int = 1024
    seed: Optional[int] = None
    current_value: float = 0.0
    target_value: float = 0.0
    last_ket: Optional[str] = None
    _ramp_start: float = field(default=0.0, repr=False)
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= core.MAX_QUBITS:
            raise ArgumentError(f"num_qubits must be 1..{core.MAX_QUBITS}")
        if self.ramp_ms < 0 or self.shots < 1:
            raise ArgumentError("ramp_ms must be >= 0 and shots >= 1")
        self._rng = core.make_rng(self.seed)
        self._ramp_start = self.current_value

    def circuit(self) -> QuantumCircuit:
        qc = QuantumCircuit("superposition", self.num_qubits, self.num_qubits)
        for q in range(self.num_qubits):
            qc.h(q)
        return qc.measure_all()

    @property
    def resolution(self) -> int:
        return 2**self.num_qubits


def trigger_superposition(device: SuperpositionDevice) -> tuple[str, float]:
    counts = core.sample_counts(device.circuit(), device.shots, device._rng)
    ket, _ = winning_state(counts)
    device.last_ket = ket
    # a retrigger mid-ramp continues from wherever the knob is now
    device._ramp_start = device.current_value
    device.target_value = int(ket, 2) / device.resolution
    if device.ramp_ms == 0:
        device.current_value = device.target_value
    return ket, device.target_value


def step_interpolation(device: SuperpositionDevice, elapsed_ms: float) -> float:
    """Knob value `elapsed_ms` after the last trigger."""
    if elapsed_ms < 0:
        raise ArgumentError("elapsed_ms must be >= 0")
    if device.ramp_ms == 0 or elapsed_ms >= device.ramp_ms:
        device.current_value = device.target_value
    else:
        frac = elapsed_ms / device.ramp_ms
        start = device._ramp_start
        device.current_value = start + (device.target_value - start) * frac
    return device.current_value


@dataclass
class ProbabilityGate:
    p: float = 1.0
    seed: Optional[int] = None
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.p = min(1.0, max(0.0, float(self.p)))
        self._rng = core.make_rng(self.seed)


def gate_event(gate: ProbabilityGate) -> bool:
    return bool(gate._rng.random() < gate.p)


def map_range(value, in_lo, in_hi, out_lo, out_hi) -> float:
    if in_lo == in_hi:
        raise ArgumentError("input range is empty")
    out = out_lo + (value - in_lo) * (out_hi - out_lo) / (in_hi - in_lo)
    lo, hi = min(out_lo, out_hi), max(out_lo, out_hi)
    return float(min(hi, max(lo, out)))
