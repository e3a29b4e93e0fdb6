"""Named circuits and simulators driven by the command language.

A :class:`Session` holds any number of circuits and simulators, mirrors the
message semantics of the toolkit object (creation, gate appending,
composition, auto-updating simulators, retrieval) and logs each action.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import core, lang, qasm
from .core import GateOp, QuantumCircuit
from .errors import (
    ArgumentError,
    CompositionError,
    QacError,
    UndefinedNameError,
)

log = logging.getLogger("qac.session")


@dataclass(frozen=True)
class LogEvent:
    severity: str  # "info" | "error"
    text: str


@dataclass
class SimulatorHandle:
    name: str
    source_circuit: str
    snapshot: QuantumCircuit
    shots: int
    sim_update: bool = False
    seed: Optional[int] = None
    detached: bool = False
    rng: np.random.Generator = field(init=False, repr=False, compare=False)
    _source: Optional[QuantumCircuit] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.rng = core.make_rng(self.seed)


@dataclass
class Reply:
    """One outgoing message: a selector word plus its payload."""

    selector: str
    value: Any

    @property
    def text(self) -> str:
        v = self.value
        if self.selector == "counts":
            return f"counts {core.format_counts(v)}"
        if self.selector == "memory":
            return "memory " + " ".join(v)
        if self.selector == "statevector":
            parts = []
            for amp in v:
                parts += [f"{amp.real:.12g}", f"{amp.imag:.12g}"]
            return "statevector " + " ".join(parts)
        return f"{self.selector} {v}"

    def __str__(self):
        return self.text


def _derive_seed(base: int, index: int) -> int:
    state = np.random.SeedSequence([base, index]).generate_state(1, np.uint64)
    return int(state[0])


class Session:
    """Registry of circuits and simulators.

    ``console_output=False`` silences info events; errors are always emitted.
    With a session ``seed``, simulators created without their own seed get a
    deterministic per-creation seed derived from it.
    """

    def __init__(self, console_output: bool = True, seed: Optional[int] = None):
        self.circuits: dict[str, QuantumCircuit] = {}
        self.simulators: dict[str, SimulatorHandle] = {}
        self.console_output = console_output
        self.seed = seed
        self.events: list[LogEvent] = []
        self._sim_count = 0

    # -- logging ---------------------------------------------------------

    def info(self, text: str) -> None:
        if self.console_output:
            self.events.append(LogEvent("info", text))
            log.info(text)

    def error(self, text: str) -> None:
        self.events.append(LogEvent("error", text))
        log.error(text)

    # -- lookups ------------------------------------------------------------

    def circuit(self, name: str) -> QuantumCircuit:
        try:
            return self.circuits[name]
        except KeyError:
            raise UndefinedNameError(
                f"circuit {name!r} has not been previously set"
            ) from None

    def simulator(self, name: str) -> SimulatorHandle:
        try:
            return self.simulators[name]
        except KeyError:
            raise UndefinedNameError(
                f"simulator {name!r} has not been previously set"
            ) from None

    # -- operations --------------------------------------------------------

    def create_circuits(self, specs: Sequence[tuple]) -> None:
        built = []
        for spec in specs:
            name, nq, *rest = spec
            nc = rest[0] if rest and rest[0] is not None else 0
            if nq < 1 or nc < 0:
                raise ArgumentError(
                    f"QuantumCircuit {name!r} needs a positive qubit count, got {nq} {nc}"
                )
            built.append(QuantumCircuit(name, int(nq), int(nc)))
        for qc in built:
            if qc.name in self.circuits:
                self.info(f"QuantumCircuit {qc.name} reset")
            self.circuits[qc.name] = qc
            self.info(
                f"QuantumCircuit {qc.name} created with {qc.num_qubits} qubit(s) "
                f"and {qc.num_clbits} classical bit(s)"
            )

    def append_gate(self, circuit_name: str, gate: str, args: Sequence[float]) -> None:
        qc = self.circuit(circuit_name)
        op = build_op(gate, args)
        qc.append(op)
        self.info(f"{circuit_name}: {lang.AppendGate(circuit_name, gate, tuple(args)).render()}")

    def compose(self, dst_name: str, src_name: str) -> None:
        dst, src = self.circuit(dst_name), self.circuit(src_name)
        if src.num_qubits > dst.num_qubits or src.num_clbits > dst.num_clbits:
            raise CompositionError(
                f"cannot add {src_name} ({src.num_qubits} qubits, {src.num_clbits} clbits) "
                f"to {dst_name} ({dst.num_qubits} qubits, {dst.num_clbits} clbits)"
            )
        dst.extend(list(src.ops))
        self.info(f"{dst_name}: added {len(src.ops)} op(s) from {src_name}")

    def create_simulator(
        self,
        name: str,
        circuit_name: str,
        shots: int,
        sim_update: bool = False,
        seed: Optional[int] = None,
    ) -> None:
        qc = self.circuit(circuit_name)
        if shots < 1:
            raise ArgumentError(f"Simulator {name!r} needs shots >= 1, got {shots}")
        if seed is None and self.seed is not None:
            seed = _derive_seed(self.seed, self._sim_count)
        self._sim_count += 1
        self.simulators[name] = SimulatorHandle(
            name, circuit_name, qc.copy(), int(shots), bool(sim_update), seed, _source=qc
        )
        self.info(
            f"Simulator {name} created for {circuit_name} with {shots} shots"
            + (" (sim_update on)" if sim_update else "")
        )

    def _snapshot(self, handle: SimulatorHandle) -> QuantumCircuit:
        if not handle.sim_update:
            return handle.snapshot
        current = self.circuits.get(handle.source_circuit)
        if current is None or current is not handle._source:
            if not handle.detached:
                handle.detached = True
                self.info(
                    f"warning: Simulator {handle.name} is detached from "
                    f"{handle.source_circuit}; keeping its last snapshot"
                )
            return handle.snapshot
        return current.copy()

    def retrieve(self, simulator_name: str, what: str) -> Any:
        handle = self.simulator(simulator_name)
        qc = self._snapshot(handle)
        if what == "counts":
            result = core.sample_counts(qc, handle.shots, handle.rng)
        elif what == "memory":
            result = core.sample_memory(qc, handle.shots, handle.rng)
        elif what == "statevector":
            result = core.run_statevector(qc)
        elif what == "qasm":
            result = qasm.emit_qasm(qc)
        elif what == "qiskit":
            result = qasm.emit_framework_code(qc, handle.shots)
        else:
            raise ArgumentError(f"unknown retrieval {what!r}")
        handle.snapshot = qc
        self.info(f"{simulator_name}: get_{what}")
        return result

    def set_attribute(self, name: str, value: int) -> None:
        if name == "console_output":
            self.console_output = bool(value)
        elif name == "seed":
            self.seed = int(value)
        else:
            raise ArgumentError(f"unknown attribute {name!r}")
        self.info(f"{name} set to {value}")

    # -- command execution ---------------------------------------------------

    def execute(self, command: "lang.Command | str") -> list[Reply]:
        """Run one command (or one message-box line) and return its replies.

        Errors are logged and re-raised; the session is left unchanged.
        """
        if isinstance(command, str):
            replies = []
            for group in lang.split_message_groups(command):
                replies += self.execute(self._parse(group))
            return replies
        try:
            return self._dispatch(command)
        except QacError as exc:
            self.error(str(exc))
            exc.logged = True
            raise

    def _parse(self, text: str):
        try:
            return lang.parse_command(text)
        except QacError as exc:
            self.error(str(exc))
            exc.logged = True
            raise

    def _dispatch(self, cmd) -> list[Reply]:
        if isinstance(cmd, lang.CreateCircuits):
            self.create_circuits(cmd.specs)
        elif isinstance(cmd, lang.AppendGate):
            self.append_gate(cmd.circuit, cmd.gate, cmd.args)
        elif isinstance(cmd, lang.Compose):
            self.compose(cmd.dst, cmd.src)
        elif isinstance(cmd, lang.CreateSimulator):
            self.create_simulator(cmd.name, cmd.circuit, cmd.shots, cmd.sim_update)
        elif isinstance(cmd, lang.SetAttribute):
            self.set_attribute(cmd.name, cmd.value)
        elif isinstance(cmd, lang.Retrieve):
            value = self.retrieve(cmd.simulator, cmd.what)
            if cmd.what in ("qasm", "qiskit") and not cmd.textbox:
                return [Reply(cmd.what, line) for line in value.splitlines()]
            return [Reply(cmd.what, value)]
        else:
            raise ArgumentError(f"unsupported command {cmd!r}")
        return []

    def run_script(self, text: str, stop_on_error: bool = True) -> list[Reply]:
        replies = []
        for cmd in lang.parse_script(text):
            try:
                replies += self.execute(cmd)
            except QacError:
                if stop_on_error:
                    raise
        return replies


def build_op(gate: str, args: Sequence[float]) -> GateOp:
    """Turn a message's gate token and numeric arguments into a GateOp.

    Argument order follows the message format: indices for plain gates,
    ``angle q...`` for rotations, ``q c`` for ``m``, and the flat matrix
    values for ``unitary`` (applied to qubits 0..k-1).
    """
    if gate not in core.GATE_KINDS:
        raise ArgumentError(f"unknown gate {gate!r}")
    if gate == "unitary":
        matrix, k = core.unitary_from_values(args)
        return GateOp("unitary", tuple(range(k)), matrix=matrix)

    def index(v):
        if float(v) != int(v):
            raise ArgumentError(f"gate {gate!r} needs integer indices, got {v}")
        return int(v)

    arity = core.GATE_ARITY[gate]
    if gate == "m":
        if len(args) != 2:
            raise ArgumentError(f"m takes a qubit and a classical bit, got {len(args)} args")
        return GateOp("m", (index(args[0]),), clbit=index(args[1]))
    if gate in core.ANGLE_GATES:
        if len(args) != arity + 1:
            raise ArgumentError(f"{gate} takes an angle and {arity} qubit(s)")
        return GateOp(gate, tuple(index(a) for a in args[1:]), angle=float(args[0]))
    if len(args) != arity:
        raise ArgumentError(f"{gate} takes {arity} qubit(s), got {len(args)}")
    return GateOp(gate, tuple(index(a) for a in args))
