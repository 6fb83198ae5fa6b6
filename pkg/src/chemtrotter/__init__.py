"""Controlled Trotter-step compiler for second-quantized chemistry Hamiltonians."""
from .circuit import Circuit, Gate, GateKind, gate_counts, parallel_depth
from .hamiltonian import FermionTerm, SpinOrbitalIntegrals, TermKind, classify_terms
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Circuit", "FermionTerm", "Gate", "GateKind", "SpinOrbitalIntegrals",
    "TermKind", "classify_terms", "gate_counts", "parallel_depth",
]
