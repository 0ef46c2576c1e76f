"""Garbage-free reversible logic: circuits, simulation, generators, synthesis, HDL and a reversible machine."""
from .circuit import (
    CNOT,
    FREDKIN,
    NOT,
    SWAP,
    TOFFOLI,
    Circuit,
    CircuitError,
    CircuitStats,
    Gate,
    GateKind,
    LineInfo,
    concat,
    invert,
    parallel,
    stats,
    validate,
)
from .realfmt import read_real, write_real
from .simulator import (
    BitState,
    GarbageReport,
    Permutation,
    apply_gate,
    bennett_embed,
    check_bijective,
    check_garbage_free,
    permutation,
    run,
)

__version__ = "0.1.0"
