import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qac.bma import (
    NoteEvent,
    ResampleSignal,
    SequencerAborted,
    SequencerConfig,
    TransitionTable,
    bma_messages,
    build_bma_circuit,
    build_oracle_matrix,
    calc_next_note,
    check_proportion,
    circuit_qubits,
    get_target_states,
    next_event,
    play,
    run_sequencer,
    states2qubits,
)
from qac.core import check_unitary, make_rng, run_statevector
from qac.errors import ArgumentError, ProportionError, UndefinedNameError, UnsupportedError
from qac.registry import Session

from oracle import circuit_ops, oracle_statevector

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture
def twelve():
    return TransitionTable.load(DATA / "twelve.json")


@pytest.fixture
def two():
    return TransitionTable((("0", 60), ("1", 67)), ((0, 1), (1, 0)))


def target_probability(targets, n):
    qc = build_bma_circuit(targets, n)
    probs = np.abs(oracle_statevector(n, circuit_ops(qc))) ** 2
    return sum(p for i, p in enumerate(probs) if i < len(targets) and targets[i])


def grover_closed_form(m, n_states):
    theta = math.asin(math.sqrt(m / n_states))
    return math.sin(3 * theta) ** 2


def test_table_validation():
    with pytest.raises(ArgumentError):
        TransitionTable((("a", 60),), ((1,),))
    with pytest.raises(ArgumentError):
        TransitionTable((("a", 60), ("b", 61)), ((1, 0), (0, 0)))  # dead end
    with pytest.raises(ArgumentError):
        TransitionTable((("a", 60), ("b", 61)), ((1, 2), (1, 0)))
    with pytest.raises(ArgumentError):
        TransitionTable((("a", 60), ("b", 200)), ((0, 1), (1, 0)))


def test_table_json_roundtrip(twelve):
    assert TransitionTable.from_dict(twelve.to_dict()) == twelve
    assert len(twelve) == 12


def test_get_target_states(twelve, two):
    flags = get_target_states(twelve, "C")
    assert [i for i, f in enumerate(flags) if f] == [2, 7]
    assert flags == list(twelve.matrix[0])
    assert get_target_states(two, "0") == [0, 1]
    with pytest.raises(UndefinedNameError):
        get_target_states(two, "Z")


@pytest.mark.parametrize("k,n", [(12, 4), (16, 4), (17, 5), (2, 1), (3, 2), (5, 3)])
def test_states2qubits(k, n):
    assert states2qubits(k) == n


def test_states2qubits_rejects_single_state():
    with pytest.raises(ArgumentError):
        states2qubits(1)
    assert circuit_qubits(2) == 2


def test_check_proportion():
    assert check_proportion([0, 0, 1, 0, 0, 0, 0, 1] + [0] * 4, 4) == "ok"
    assert check_proportion([1] * 8, 4) == "warning"
    assert check_proportion([1], 2) == "ok"


def test_oracle_matrix():
    targets = [0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0]
    m = build_oracle_matrix(targets, 4)
    expected = [1, 1, -1, 1, 1, 1, 1, -1] + [1] * 8
    np.testing.assert_array_equal(m, np.diag(expected))
    check_unitary(m, tol=0.0)
    np.testing.assert_array_equal(build_oracle_matrix([1], 2), np.diag([-1, 1, 1, 1]))
    with pytest.raises(ArgumentError):
        build_oracle_matrix([0, 0, 0], 2)


def test_circuit_layout():
    qc = build_bma_circuit([0, 1, 0, 0], 2)
    kinds = [op.kind for op in qc.ops]
    assert kinds == ["h", "h", "unitary", "h", "h", "x", "x", "h", "cx", "h",
                     "x", "x", "h", "h", "m", "m"]
    assert [op.kind for op in build_bma_circuit([1, 0, 0], 3).ops].count("ccx") == 1
    assert [op.kind for op in build_bma_circuit([1] + [0] * 11, 4).ops].count("cccx") == 1


@pytest.mark.parametrize("target", range(4))
def test_single_target_of_four_is_certain(target):
    flags = [0] * 4
    flags[target] = 1
    assert target_probability(flags, 2) == pytest.approx(1.0, abs=1e-9)


def test_two_of_sixteen_amplified():
    flags = [0, 0, 1, 0, 0, 0, 0, 1] + [0] * 8
    p = target_probability(flags, 4)
    assert p > 2 / 16
    assert p == pytest.approx(grover_closed_form(2, 16), abs=1e-9)


def test_engine_matches_oracle_on_bma_circuit():
    qc = build_bma_circuit([0, 0, 1, 0, 0, 0, 0, 1], 4)
    np.testing.assert_allclose(
        run_statevector(qc), oracle_statevector(4, circuit_ops(qc)), atol=1e-9
    )


def test_synthesis_limits():
    with pytest.raises(UnsupportedError):
        build_bma_circuit([1] + [0] * 20, 5)
    with pytest.raises(ProportionError):
        build_bma_circuit([1, 1, 0, 0], 2)
    with pytest.raises(UnsupportedError):
        build_bma_circuit([1, 0], 1)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 4).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.booleans(), min_size=2**n, max_size=2**n))))
def test_amplification_property(case):
    n, flags = case
    flags = [int(f) for f in flags]
    m = sum(flags)
    if m == 0 or 2 * m >= 2**n:
        return
    p = target_probability(flags, n)
    assert p > m / 2**n
    assert p == pytest.approx(grover_closed_form(m, 2**n), abs=1e-9)


def test_messages_build_the_same_circuit():
    flags = [0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0]
    s = Session(console_output=False, seed=1)
    replies = []
    for line in bma_messages(flags, 4, shots=100):
        replies += s.execute(line)
    assert s.circuits["qc"].ops == build_bma_circuit(flags, 4).ops
    assert sum(replies[-1].value.values()) == 100


def test_calc_next_note(twelve):
    counts = {"0010": 61, "0111": 29, "0000": 4, "1111": 6}
    assert calc_next_note(counts, twelve) == ("D", 62, "0010")
    three = TransitionTable((("a", 1), ("b", 2), ("c", 3)), ((0, 1, 0), (1, 0, 0), (1, 0, 0)))
    assert calc_next_note({"01": 100}, three)[0] == "b"
    assert calc_next_note({"00": 50, "11": 50}, TransitionTable(
        tuple((str(i), 60 + i) for i in range(4)), ((0, 1, 0, 0),) * 4))[2] == "00"
    with pytest.raises(ResampleSignal):
        calc_next_note({"1110": 90, "0010": 10}, twelve)


def test_two_pitch_alternates(two):
    events = run_sequencer(two, SequencerConfig("0", 4, seed=3))
    assert [e.label for e in events] == ["1", "0", "1", "0"]
    assert [e.t_ms for e in events] == [0, 150, 300, 450]
    assert all(e.winning_count == 100 for e in events)


def test_zero_loops(two):
    assert run_sequencer(two, SequencerConfig("0", 0)) == []


def test_unknown_start_label(two):
    with pytest.raises(UndefinedNameError):
        run_sequencer(two, SequencerConfig("Q", 3))


# With at most 4 targets out of 16, each target has probability >= 0.47
# (one target) and each non-target <= 0.036, so a non-target winning the
# argmax of 100 shots needs a ~10 sigma excursion; the seeds are fixed anyway.
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_sequence_respects_table(twelve, seed):
    events = run_sequencer(twelve, SequencerConfig("C", 100, seed=seed))
    prev = "C"
    for e in events:
        assert twelve.matrix[twelve.index(prev)][twelve.index(e.label)] == 1
        assert e.midi_note == twelve.labels[int(e.winning_state, 2)][1]
        prev = e.label


def test_sequence_determinism(twelve):
    a = run_sequencer(twelve, SequencerConfig("E", 30, seed=7))
    b = run_sequencer(twelve, SequencerConfig("E", 30, seed=7))
    assert a == b


def test_markov_step_depends_on_label_and_stream_only(twelve):
    rng = make_rng(5)
    run_sequencer(twelve, SequencerConfig("C", 5, seed=11))  # unrelated history
    state = rng.bit_generator.state
    first = next_event(twelve, "G", rng)
    rng2 = make_rng(0)
    rng2.bit_generator.state = state
    assert next_event(twelve, "G", rng2) == first


def test_padded_winner_resampled():
    # 3 labels over 2 qubits: state 11 is padding and never a target
    table = TransitionTable((("a", 1), ("b", 2), ("c", 3)), ((0, 1, 0), (0, 0, 1), (1, 0, 0)))
    events = run_sequencer(table, SequencerConfig("a", 6, seed=0))
    assert [e.label for e in events] == ["b", "c", "a", "b", "c", "a"]


def test_abort_keeps_partial_events():
    # row "b" marks 3 of 4 states, which synthesis refuses
    table = TransitionTable(
        (("a", 1), ("b", 2), ("c", 3), ("d", 4)),
        ((0, 1, 0, 0), (1, 0, 1, 1), (1, 0, 0, 0), (1, 0, 0, 0)))
    with pytest.raises(SequencerAborted) as info:
        run_sequencer(table, SequencerConfig("a", 5, seed=0))
    assert [e.label for e in info.value.events] == ["b"]
    assert isinstance(info.value.cause, ProportionError)


def test_play_uses_offsets():
    now = [0.0]
    slept = []

    def sleep(dt):
        slept.append(round(dt, 6))
        now[0] += dt

    out = []
    events = [NoteEvent(t, 60, "C", "0000", 1) for t in (0, 150, 300)]
    play(iter(events), out.append, clock=lambda: now[0], sleep=sleep)
    assert out == events
    assert slept == [0.15, 0.15]


def test_csv_line():
    assert NoteEvent(150, 62, "D", "0010", 61).csv() == "150,62,D,0010,61"
