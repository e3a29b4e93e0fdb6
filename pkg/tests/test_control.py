import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qac.control import (
    ProbabilityGate,
    SuperpositionDevice,
    gate_event,
    map_range,
    step_interpolation,
    trigger_superposition,
)
from qac.errors import ArgumentError


def test_trigger_maps_ket_to_fraction():
    for seed in range(50):
        dev = SuperpositionDevice(num_qubits=2, seed=seed, shots=64)
        ket, target = trigger_superposition(dev)
        assert target == int(ket, 2) / 4
        if ket == "11":
            assert target == 0.75
            break
    else:
        pytest.fail("no seed produced ket 11")


def test_one_qubit_reaches_both_values():
    seen = {trigger_superposition(SuperpositionDevice(1, shots=100_000, seed=s))[1]
            for s in range(20)}
    assert seen == {0.0, 0.5}


def test_four_qubits_reach_sixteen_values():
    dev = SuperpositionDevice(num_qubits=4, shots=1, seed=0)
    seen = {trigger_superposition(dev)[1] for _ in range(1000)}
    assert seen == {k / 16 for k in range(16)}


@pytest.mark.parametrize("n", range(1, 7))
def test_quantization(n):
    dev = SuperpositionDevice(num_qubits=n, shots=16, seed=n)
    for _ in range(40):
        _, target = trigger_superposition(dev)
        k = target * 2**n
        assert k == int(k) and 0 <= k < 2**n


def test_zero_ramp_jumps():
    dev = SuperpositionDevice(num_qubits=3, ramp_ms=0, seed=1)
    _, target = trigger_superposition(dev)
    assert dev.current_value == target
    assert step_interpolation(dev, 0) == target
    assert step_interpolation(dev, 12345) == target


def test_ramp_midpoint_and_end():
    dev = SuperpositionDevice(num_qubits=2, ramp_ms=1000)
    dev.target_value = 0.75
    assert step_interpolation(dev, 500) == 0.375
    assert step_interpolation(dev, 1000) == 0.75
    assert step_interpolation(dev, 4000) == 0.75
    with pytest.raises(ArgumentError):
        step_interpolation(dev, -1)


def test_retrigger_restarts_from_current_value():
    dev = SuperpositionDevice(num_qubits=3, ramp_ms=100, seed=4, shots=8)
    trigger_superposition(dev)
    mid = step_interpolation(dev, 50)
    _, target = trigger_superposition(dev)
    assert step_interpolation(dev, 0) == mid
    assert step_interpolation(dev, 50) == pytest.approx(mid + (target - mid) / 2)


@given(st.integers(1, 6), st.integers(0, 2**32), st.integers(1, 2000))
def test_ramps_are_monotone(n, seed, ramp):
    dev = SuperpositionDevice(num_qubits=n, ramp_ms=ramp, seed=seed, shots=4)
    trigger_superposition(dev)
    values = [step_interpolation(dev, t) for t in range(0, ramp + 2, max(1, ramp // 17))]
    diffs = [b - a for a, b in zip(values, values[1:])]
    assert all(d >= -1e-15 for d in diffs) or all(d <= 1e-15 for d in diffs)


def test_gate_extremes():
    never, always = ProbabilityGate(0, seed=1), ProbabilityGate(1, seed=1)
    assert not any(gate_event(never) for _ in range(10_000))
    assert all(gate_event(always) for _ in range(10_000))


def test_gate_clamps():
    assert ProbabilityGate(3.0).p == 1.0
    assert ProbabilityGate(-1).p == 0.0


def test_gate_half():
    g = ProbabilityGate(0.5, seed=3)
    passes = sum(gate_event(g) for _ in range(10_000))
    assert 4700 <= passes <= 5300  # 5000 +/- 4 sigma (sigma = 50)


@pytest.mark.parametrize("args,expected", [
    ((63.5, 0, 127, 0, 1), 0.5),
    ((127, 0, 127, 0, 1), 1.0),
    ((200, 0, 127, 0, 1), 1.0),
    ((-5, 0, 127, 0, 1), 0.0),
    ((0.25, 0, 1, 10, 0), 7.5),
])
def test_map_range(args, expected):
    assert map_range(*args) == expected


def test_map_range_degenerate():
    with pytest.raises(ArgumentError):
        map_range(1, 5, 5, 0, 1)
