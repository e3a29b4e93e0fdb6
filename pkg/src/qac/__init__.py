"""qac: a small statevector toolkit for quantum-aided music composition."""
from .core import GateOp, QuantumCircuit, make_rng, run_statevector, sample_counts, sample_memory
from .errors import QacError
from .qasm import emit_qasm, parse_qasm
from .registry import Session

__all__ = [
    "GateOp",
    "QacError",
    "QuantumCircuit",
    "Session",
    "emit_qasm",
    "make_rng",
    "parse_qasm",
    "run_statevector",
    "sample_counts",
    "sample_memory",
]
__version__ = "0.1.0"
