"""OpenQASM 2.0 subset reader/writer and Qiskit script generation.

These are view layers over :class:`~qac.core.QuantumCircuit`; simulation
never goes through QASM text.
"""
from __future__ import annotations

import math
import re
from typing import Optional

from .core import GATE_ARITY, GateOp, QuantumCircuit
from .errors import ParseError, QacError, RangeError, UnsupportedExportError

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

# engine kind -> qelib1 name (everything else maps to itself)
_EXPORT_NAMES = {"cccx": "c3x"}
_IMPORT_NAMES = {
    **{k: k for k in GATE_ARITY if k != "m"},
    "c3x": "cccx",
    "cccx": "cccx",
}
# well-formed qelib1 gates outside the engine's gate set
_KNOWN_UNSUPPORTED = {
    "u", "u0", "u1", "u2", "u3", "U", "CX", "id", "sdg", "tdg", "sx", "sxdg",
    "ch", "cy", "cu1", "cu3", "cp", "cu", "rxx", "rzz", "cswap", "c3sqrtx",
    "c4x", "rccx", "rc3x", "p", "cphase",
}


# -- tokenizer -------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,\[\]()+\-*/^{}])
    """,
    re.VERBOSE,
)


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {text[pos]!r}",
                token=text[pos], line=line, column=pos - line_start + 1,
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# -- expressions (angles) ----------------------------------------------------

_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
    "ln": math.log, "sqrt": math.sqrt,
}


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message, tok=None):
        tok = tok or self.cur
        return ParseError(message, token=tok.text, line=tok.line, column=tok.col)

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def accept(self, text) -> bool:
        if self.cur.text == text and self.cur.kind != "string":
            self.i += 1
            return True
        return False

    def expect(self, text) -> _Tok:
        if self.cur.text != text or self.cur.kind == "string":
            found = self.cur.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def expect_kind(self, kind, what) -> _Tok:
        if self.cur.kind != kind:
            found = self.cur.text or "end of input"
            raise self.error(f"expected {what}, found {found!r}")
        return self.next()

    def expect_int(self) -> int:
        tok = self.expect_kind("real", "an integer")
        if not re.fullmatch(r"[0-9]{1,9}", tok.text):
            raise self.error("expected an integer", tok)
        return int(tok.text)

    # expr := term (('+'|'-') term)*
    def expr(self) -> float:
        value = self.term()
        while self.cur.text in ("+", "-"):
            if self.next().text == "+":
                value += self.term()
            else:
                value -= self.term()
        return value

    def term(self) -> float:
        value = self.power()
        while self.cur.text in ("*", "/"):
            op = self.next()
            rhs = self.power()
            if op.text == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise self.error("division by zero", op)
                value /= rhs
        return value

    def power(self) -> float:
        base = self.unary()
        if self.cur.text == "^":
            op = self.next()
            exponent = self.power()
            try:
                return float(base**exponent)
            except (OverflowError, ZeroDivisionError, TypeError):
                raise self.error("invalid power", op) from None
        return base

    def unary(self) -> float:
        if self.accept("-"):
            return -self.unary()
        if self.accept("+"):
            return self.unary()
        return self.atom()

    def atom(self) -> float:
        tok = self.cur
        if tok.kind == "real":
            self.next()
            return float(tok.text)
        if tok.kind == "id" and tok.text == "pi":
            self.next()
            return math.pi
        if tok.kind == "id" and tok.text in _FUNCS:
            self.next()
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            try:
                return _FUNCS[tok.text](arg)
            except (ValueError, OverflowError):
                raise self.error(f"{tok.text}({arg}) is undefined", tok) from None
        if self.accept("("):
            value = self.expr()
            self.expect(")")
            return value
        raise self.error(f"expected a number or expression, found {tok.text or 'end of input'!r}")


def parse_angle(text: str) -> float:
    """Evaluate an angle expression such as ``pi/2`` or ``-0.25``."""
    p = _Parser(_tokenize(text))
    value = p.expr()
    if p.cur.kind != "eof":
        raise p.error(f"unexpected {p.cur.text!r} in angle")
    if not math.isfinite(value):
        raise ParseError(f"angle {text!r} is not finite", token=text)
    return value


# -- parsing -----------------------------------------------------------------


def parse_qasm(text: str, name: str = "qasm") -> QuantumCircuit:
    p = _Parser(_tokenize(text))
    p.expect("OPENQASM")
    ver = p.expect_kind("real", "a version number")
    if float(ver.text) != 2.0:
        raise p.error(f"only OpenQASM 2.0 is supported, got {ver.text}", ver)
    p.expect(";")

    qreg: Optional[tuple[str, int]] = None
    creg: Optional[tuple[str, int]] = None
    circuit: Optional[QuantumCircuit] = None

    def need_circuit(tok):
        nonlocal circuit
        if qreg is None:
            raise p.error("statement before any qreg declaration", tok)
        if circuit is None:
            circuit = QuantumCircuit(name, qreg[1], creg[1] if creg else 0)
        return circuit

    def argument(reg, kind):
        tok = p.expect_kind("id", f"a {kind} register")
        if reg is None or tok.text != reg[0]:
            raise p.error(f"undeclared {kind} register {tok.text!r}", tok)
        if p.accept("["):
            idx_tok = p.cur
            idx = p.expect_int()
            p.expect("]")
            if idx >= reg[1]:
                raise RangeError(
                    f"{tok.text}[{idx}] overflows {kind} register of size {reg[1]} "
                    f"(line {idx_tok.line}, column {idx_tok.col})"
                )
            return [idx]
        return list(range(reg[1]))

    def add(tok, kind, qubits, angle=None, clbit=None):
        qc = need_circuit(tok)
        try:
            qc.append(GateOp(kind, qubits, angle=angle, clbit=clbit))
        except RangeError:
            raise
        except QacError as exc:
            raise p.error(str(exc), tok) from None

    while p.cur.kind != "eof":
        tok = p.next()
        word = tok.text
        if tok.kind != "id":
            raise p.error(f"unexpected {word!r}", tok)
        if word == "include":
            inc = p.expect_kind("string", "an include file name")
            if inc.text != '"qelib1.inc"':
                raise p.error(f"cannot include {inc.text}", inc)
            p.expect(";")
        elif word in ("qreg", "creg"):
            reg_name = p.expect_kind("id", "a register name").text
            p.expect("[")
            size = p.expect_int()
            p.expect("]")
            p.expect(";")
            if circuit is not None:
                raise p.error(f"{word} declared after the first statement", tok)
            if word == "qreg":
                if qreg is not None:
                    raise p.error("only one qreg is supported", tok)
                if size < 1:
                    raise p.error("qreg needs at least one qubit", tok)
                qreg = (reg_name, size)
            else:
                if creg is not None:
                    raise p.error("only one creg is supported", tok)
                creg = (reg_name, size)
        elif word == "measure":
            src = argument(qreg, "quantum")
            p.expect("->")
            dst = argument(creg, "classical")
            p.expect(";")
            if len(src) != len(dst):
                raise p.error("measure register sizes differ", tok)
            for q, c in zip(src, dst):
                add(tok, "m", (q,), clbit=c)
        elif word == "barrier":
            argument(qreg, "quantum")
            while p.accept(","):
                argument(qreg, "quantum")
            p.expect(";")
        elif word in ("gate", "opaque", "if", "reset"):
            raise p.error(f"{word!r} statements are not supported", tok)
        else:
            kind = _IMPORT_NAMES.get(word)
            if kind is None:
                if word in _KNOWN_UNSUPPORTED:
                    raise p.error(f"gate {word!r} is not supported by this engine", tok)
                raise p.error(f"unknown gate {word!r}", tok)
            angle = None
            if p.accept("("):
                angle = p.expr()
                p.expect(")")
                if not math.isfinite(angle):
                    raise p.error("angle is not finite", tok)
            args = [argument(qreg, "quantum")]
            while p.accept(","):
                args.append(argument(qreg, "quantum"))
            p.expect(";")
            if len(args) != GATE_ARITY[kind]:
                raise p.error(
                    f"gate {word!r} takes {GATE_ARITY[kind]} argument(s), got {len(args)}", tok
                )
            if (angle is None) == (kind in ("rx", "ry", "rz", "crx", "cry", "crz")):
                raise p.error(f"wrong parameter list for gate {word!r}", tok)
            if len(args) == 1:
                for q in args[0]:
                    add(tok, kind, (q,), angle)
            elif all(len(a) == 1 for a in args):
                add(tok, kind, tuple(a[0] for a in args), angle)
            else:
                raise p.error(f"register broadcast of {word!r} is not supported", tok)

    return need_circuit(p.cur)


# -- emission ----------------------------------------------------------------


def _fmt_angle(theta: float) -> str:
    return repr(float(theta))


def emit_qasm(circuit: QuantumCircuit) -> str:
    lines = [HEADER.rstrip("\n"), f"qreg q[{circuit.num_qubits}];"]
    if circuit.num_clbits:
        lines.append(f"creg c[{circuit.num_clbits}];")
    for op in circuit.ops:
        if op.kind == "unitary":
            raise UnsupportedExportError(
                "OpenQASM 2.0 has no arbitrary-matrix statement; "
                "use get_qiskit (emit_framework_code) for circuits with unitary gates"
            )
        if op.is_measurement:
            lines.append(f"measure q[{op.qubits[0]}] -> c[{op.clbit}];")
            continue
        name = _EXPORT_NAMES.get(op.kind, op.kind)
        if op.angle is not None:
            name += f"({_fmt_angle(op.angle)})"
        lines.append(f"{name} " + ",".join(f"q[{q}]" for q in op.qubits) + ";")
    return "\n".join(lines) + "\n"


def _matrix_literal(matrix, indent: str) -> str:
    rows = []
    for row in matrix:
        rows.append(indent + "    [" + ", ".join(repr(complex(v)) for v in row) + "],")
    return "np.array([\n" + "\n".join(rows) + "\n" + indent + "])"


def emit_framework_code(circuit: QuantumCircuit, shots: int = 1024) -> str:
    """Render a standalone Qiskit script that rebuilds and samples the circuit."""
    body = []
    for op in circuit.ops:
        q = list(op.qubits)
        if op.is_measurement:
            body.append(f"qc.measure({q[0]}, {op.clbit})")
        elif op.kind == "unitary":
            body.append(f"qc.unitary({_matrix_literal(op.matrix, '')}, {q})")
        elif op.kind == "cccx":
            body.append(f"qc.mcx({q[:3]}, {q[3]})")
        elif op.angle is not None:
            body.append(f"qc.{op.kind}({_fmt_angle(op.angle)}, {', '.join(map(str, q))})")
        else:
            body.append(f"qc.{op.kind}({', '.join(map(str, q))})")

    uses_numpy = any(op.kind == "unitary" for op in circuit.ops)
    lines = []
    if uses_numpy:
        lines.append("import numpy as np")
    lines += [
        "from qiskit import QuantumCircuit, transpile",
        "from qiskit.providers.basic_provider import BasicSimulator",
        "",
        f"qc = QuantumCircuit({circuit.num_qubits}, {circuit.num_clbits})",
        *body,
        "",
    ]
    if circuit.has_measurements:
        lines += [
            "backend = BasicSimulator()",
            f"job = backend.run(transpile(qc, backend), shots={int(shots)})",
            "print(job.result().get_counts())",
        ]
    else:
        lines += [
            "from qiskit.quantum_info import Statevector",
            "",
            "print(Statevector(qc))",
        ]
    return "\n".join(lines) + "\n"
