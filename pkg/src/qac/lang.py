"""Parsers for the session command language and the minified circuit notation.

Command language (one message per line, comma-separated groups are sent
as consecutive messages, ``#`` starts a comment)::

    QuantumCircuit qc 1 qw 1 1          create circuits (qubits [clbits]) ...
    qc h 0                              append a gate
    qw m 0 0                            measure qubit 0 into clbit 0
    qc rx 1.5708 0                      angle first, then qubit(s)
    qc unitary 1 0 0 -1                 flat matrix over qubits 0..k-1
    qc add qw                           append qw's ops to qc
    Simulator sim qc 127 [1]            simulator with shots [sim_update]
    sim get_counts | get_memory | get_statevector | get_qasm | get_qiskit [textbox]
    set console_output 0|1

Minified notation: a list of tokens whose first entry is the qubit count,
followed by gate tokens ``<gate><qubit>``, ``<gate><q1><q2>...`` (one digit
per qubit, or ``_``-separated indices such as ``cx10_11``) and
``<gate>(<angle>)<qubit>`` with the angle in radians. All qubits are
measured into like-indexed clbits at the end.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import ClassVar, Optional, Union

from .core import ANGLE_GATES, GATE_ARITY, GATE_KINDS, MAX_QUBITS, GateOp, QuantumCircuit
from .errors import ParseError, QacError, RangeError
from .qasm import parse_angle

RETRIEVE_METHODS = {
    "get_counts": "counts",
    "get_memory": "memory",
    "get_statevector": "statevector",
    "get_qasm": "qasm",
    "get_qiskit": "qiskit",
}
ATTRIBUTES = ("console_output", "seed")

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*\Z")
_INT_RE = re.compile(r"[+-]?[0-9]+\Z")

Number = Union[int, float]


def _fmt_number(v: Number) -> str:
    return str(v) if isinstance(v, int) else repr(v)


@dataclass(frozen=True)
class CreateCircuits:
    verb: ClassVar[str] = "CreateCircuits"
    specs: tuple[tuple[str, int, Optional[int]], ...]

    def render(self) -> str:
        parts = ["QuantumCircuit"]
        for name, nq, nc in self.specs:
            parts += [name, str(nq)] + ([] if nc is None else [str(nc)])
        return " ".join(parts)


@dataclass(frozen=True)
class AppendGate:
    verb: ClassVar[str] = "AppendGate"
    circuit: str
    gate: str
    args: tuple[Number, ...]

    def render(self) -> str:
        return " ".join([self.circuit, self.gate, *map(_fmt_number, self.args)])


@dataclass(frozen=True)
class Compose:
    verb: ClassVar[str] = "Compose"
    dst: str
    src: str

    def render(self) -> str:
        return f"{self.dst} add {self.src}"


@dataclass(frozen=True)
class CreateSimulator:
    verb: ClassVar[str] = "CreateSimulator"
    name: str
    circuit: str
    shots: int
    sim_update: bool = False

    def render(self) -> str:
        return f"Simulator {self.name} {self.circuit} {self.shots} {int(self.sim_update)}"


@dataclass(frozen=True)
class Retrieve:
    verb: ClassVar[str] = "Retrieve"
    simulator: str
    what: str
    textbox: bool = False

    def render(self) -> str:
        text = f"{self.simulator} get_{self.what}"
        return text + " textbox" if self.textbox else text


@dataclass(frozen=True)
class SetAttribute:
    verb: ClassVar[str] = "SetAttribute"
    name: str
    value: int

    def render(self) -> str:
        return f"set {self.name} {self.value}"


Command = Union[CreateCircuits, AppendGate, Compose, CreateSimulator, Retrieve, SetAttribute]


def split_message_groups(text: str) -> list[str]:
    """Split a message box on commas (outside double quotes), dropping empties."""
    segments, buf, quoted = [], [], False
    for ch in text:
        if ch == '"':
            quoted = not quoted
        if ch == "," and not quoted:
            segments.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
    segments.append("".join(buf))
    return [s.strip() for s in segments if s.strip()]


def _tokens(line: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _fail(message, tok):
    return ParseError(message, token=tok[0], column=tok[1])


def _name(tok) -> str:
    if not _NAME_RE.match(tok[0]):
        raise _fail(f"{tok[0]!r} is not a valid name", tok)
    return tok[0]


def _int(tok) -> int:
    if not _INT_RE.match(tok[0]):
        raise _fail(f"expected an integer, found {tok[0]!r}", tok)
    try:
        return int(tok[0])
    except ValueError:  # absurdly long digit strings
        raise _fail("integer literal too long", tok) from None


def _number(tok) -> Number:
    text = tok[0]
    if _INT_RE.match(text):
        return _int(tok)
    try:
        value = float(text)
    except ValueError:
        raise _fail(f"expected a number, found {text!r}", tok) from None
    if not math.isfinite(value):
        raise _fail(f"{text!r} is not a finite number", tok)
    return value


def _flag(tok) -> bool:
    if tok[0] not in ("0", "1"):
        raise _fail(f"expected 0 or 1, found {tok[0]!r}", tok)
    return tok[0] == "1"


def parse_command(line: str) -> Command:
    toks = _tokens(line)
    if not toks:
        raise ParseError("empty message")
    head = toks[0]

    if head[0] == "QuantumCircuit":
        rest = toks[1:]
        if not rest:
            raise ParseError("QuantumCircuit needs a name and a qubit count", token=head[0], column=1)
        specs, i = [], 0
        while i < len(rest):
            name = _name(rest[i])
            if i + 1 >= len(rest):
                raise _fail(f"circuit {name!r} is missing its qubit count", rest[i])
            nq = _int(rest[i + 1])
            nc = None
            i += 2
            if i < len(rest) and _INT_RE.match(rest[i][0]):
                nc = _int(rest[i])
                i += 1
            specs.append((name, nq, nc))
        return CreateCircuits(tuple(specs))

    if head[0] == "Simulator":
        args = toks[1:]
        if len(args) not in (3, 4):
            raise ParseError(
                "usage: Simulator <name> <circuit> <shots> [<sim_update>]",
                token=head[0], column=1,
            )
        update = _flag(args[3]) if len(args) == 4 else False
        return CreateSimulator(_name(args[0]), _name(args[1]), _int(args[2]), update)

    if head[0] == "set":
        if len(toks) != 3:
            raise ParseError("usage: set <attribute> <value>", token="set", column=1)
        if toks[1][0] not in ATTRIBUTES:
            raise _fail(f"unknown attribute {toks[1][0]!r}", toks[1])
        value = _flag(toks[2]) if toks[1][0] == "console_output" else _int(toks[2])
        return SetAttribute(toks[1][0], int(value))

    target = _name(head)
    if len(toks) < 2:
        raise _fail(f"message {target!r} has no method or gate", head)
    word = toks[1]
    if word[0] == "add":
        if len(toks) != 3:
            raise _fail("usage: <dst> add <src>", word)
        return Compose(target, _name(toks[2]))
    if word[0] in RETRIEVE_METHODS:
        textbox = False
        if len(toks) == 3 and toks[2][0] == "textbox":
            textbox = True
        elif len(toks) > 2:
            raise _fail(f"unexpected {toks[2][0]!r}", toks[2])
        return Retrieve(target, RETRIEVE_METHODS[word[0]], textbox)
    if word[0] in GATE_KINDS:
        return AppendGate(target, word[0], tuple(_number(t) for t in toks[2:]))
    raise _fail(f"unknown gate or method {word[0]!r}", word)


def parse_script(text: str) -> list[Command]:
    """Parse a UTF-8 command script; ParseError carries the 1-based line."""
    commands = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        for group in split_message_groups(line):
            try:
                commands.append(parse_command(group))
            except ParseError as exc:
                raise ParseError(
                    exc.message, token=exc.token, line=lineno, column=exc.column
                ) from None
    return commands


# -- minified notation ---------------------------------------------------------

_MINI_RE = re.compile(r"([a-z]+)(?:\(([^()]*)\))?([0-9_]+)\Z")


@dataclass(frozen=True)
class MinifiedCircuit:
    num_qubits: int
    tokens: tuple[str, ...]

    def expand(self, name: str = "minified") -> QuantumCircuit:
        qc = QuantumCircuit(name, self.num_qubits, self.num_qubits)
        for tok in self.tokens:
            kind, angle, qubits = _mini_gate(tok)
            for q in qubits:
                if q >= self.num_qubits:
                    raise RangeError(
                        f"token {tok!r} refers to qubit {q}; only {self.num_qubits} declared"
                    )
            try:
                qc.append(GateOp(kind, qubits, angle=angle))
            except RangeError:
                raise
            except QacError as exc:
                raise ParseError(f"{tok!r}: {exc}", token=tok) from None
        return qc.measure_all()


def _mini_gate(tok: str) -> tuple[str, Optional[float], tuple[int, ...]]:
    m = _MINI_RE.match(tok)
    if m is None:
        raise ParseError(f"malformed minified token {tok!r}", token=tok)
    kind, angle_text, digits = m.groups()
    if kind not in GATE_ARITY or kind == "m":
        raise ParseError(f"unknown gate {kind!r} in token {tok!r}", token=tok)
    arity = GATE_ARITY[kind]
    if "_" in digits:
        parts = digits.split("_")
        if not all(parts):
            raise ParseError(f"malformed qubit list in {tok!r}", token=tok)
    elif arity == 1:
        parts = [digits]
    else:
        parts = list(digits)
    if len(parts) != arity:
        raise ParseError(f"gate {kind!r} takes {arity} qubit(s) in {tok!r}", token=tok)
    if (angle_text is not None) != (kind in ANGLE_GATES):
        raise ParseError(f"angle usage does not fit gate {kind!r} in {tok!r}", token=tok)
    angle = parse_angle(angle_text) if angle_text is not None else None
    if any(len(p) > 3 for p in parts):
        raise RangeError(f"qubit index out of range in {tok!r}")
    return kind, angle, tuple(int(p) for p in parts)


def parse_minified(tokens) -> MinifiedCircuit:
    tokens = [str(t).strip() for t in tokens]
    tokens = [t for t in tokens if t]
    if not tokens:
        raise ParseError("empty minified circuit")
    if not re.fullmatch(r"[0-9]{1,3}", tokens[0]):
        raise ParseError(f"first token must be the qubit count, got {tokens[0]!r}", token=tokens[0])
    n = int(tokens[0])
    if n < 1:
        raise ParseError("minified circuit needs at least one qubit", token=tokens[0])
    if n > MAX_QUBITS:
        raise RangeError(f"{n} qubits exceeds the cap of {MAX_QUBITS}")
    for tok in tokens[1:]:
        _mini_gate(tok)
    return MinifiedCircuit(n, tuple(tokens[1:]))
