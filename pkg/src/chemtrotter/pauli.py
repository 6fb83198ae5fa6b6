"""Pauli strings and the Jordan-Wigner image of fermionic terms."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

from .hamiltonian import FermionTerm, TermKind

MAX_MATRIX_QUBITS = 14
_DROP = 1e-15

# (a, b) -> (phase, c) with sigma_a sigma_b = phase * sigma_c
_PRODUCT = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("X", "X"): (1, "I"), ("X", "Y"): (1j, "Z"), ("X", "Z"): (-1j, "Y"),
    ("Y", "I"): (1, "Y"), ("Y", "X"): (-1j, "Z"), ("Y", "Y"): (1, "I"), ("Y", "Z"): (1j, "X"),
    ("Z", "I"): (1, "Z"), ("Z", "X"): (1j, "Y"), ("Z", "Y"): (-1j, "X"), ("Z", "Z"): (1, "I"),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class SubtermOrder(enum.Enum):
    BASELINE = "baseline"
    OPTIMIZED = "optimized"


@dataclass(frozen=True)
class PauliString:
    """``coefficient * letters[0] (x) letters[1] (x) ...``; qubit 0 is the first letter."""

    letters: str
    coefficient: float = 1.0

    def __post_init__(self):
        if any(ch not in "IXYZ" for ch in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.letters) if ch != "I")

    def sites(self, letters: str) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.letters) if ch in letters)

    def commutes_with(self, other: "PauliString") -> bool:
        clash = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return clash % 2 == 0

    def __repr__(self):
        return f"{self.coefficient:+.6g}*{self.letters}"


def _mul(a: dict[str, complex], b: dict[str, complex]) -> dict[str, complex]:
    out: dict[str, complex] = {}
    for la, ca in a.items():
        for lb, cb in b.items():
            phase = 1
            letters = []
            for x, y in zip(la, lb):
                ph, z = _PRODUCT[(x, y)]
                phase *= ph
                letters.append(z)
            key = "".join(letters)
            out[key] = out.get(key, 0) + phase * ca * cb
    return out


def _ladder(j: int, n: int, create: bool) -> dict[str, complex]:
    """``c_j`` or ``c+_j`` as a Pauli sum: Z on qubits below j, then (X +- iY)/2."""
    head = "Z" * j
    tail = "I" * (n - j - 1)
    return {head + "X" + tail: 0.5, head + "Y" + tail: (-0.5j if create else 0.5j)}


def jw_expand(term: FermionTerm, n_qubits: int) -> list[PauliString]:
    """Jordan-Wigner expansion of a term's Hermitian operator, sorted by letters."""
    if any(i >= n_qubits for i in term.indices):
        raise ValueError(f"{term!r} does not fit on {n_qubits} qubits")
    creators, annihilators = term.monomial()
    factors = [_ladder(i, n_qubits, True) for i in creators]
    factors += [_ladder(i, n_qubits, False) for i in annihilators]
    op = reduce(_mul, factors)
    if not term.kind.diagonal:
        for letters, c in list(op.items()):
            op[letters] = c + np.conj(c)
    strings = []
    for letters in sorted(op):
        c = complex(op[letters]) * term.coefficient
        if abs(c) <= _DROP:
            continue
        if abs(c.imag) > 1e-12 * max(1.0, abs(c.real)):
            raise AssertionError(f"non-real Pauli weight {c} for {term!r}")
        strings.append(PauliString(letters, c.real))
    return strings


_PATTERNS = {
    TermKind.PQ: {SubtermOrder.BASELINE: ("XX", "YY"), SubtermOrder.OPTIMIZED: ("XX", "YY")},
    TermKind.PQQR: {SubtermOrder.BASELINE: ("XX", "YY"), SubtermOrder.OPTIMIZED: ("XX", "YY")},
    TermKind.PQRS: {
        SubtermOrder.BASELINE: ("XXXX", "YYYY", "XXYY", "YYXX", "XYXY", "YXYX", "XYYX", "YXXY"),
        # every step flips exactly two basis changes
        SubtermOrder.OPTIMIZED: ("XXXX", "XXYY", "YYYY", "YYXX", "YXXY", "YXYX", "XYYX", "XYXY"),
    },
}


def enumerate_subterms(kind: TermKind, order: SubtermOrder = SubtermOrder.BASELINE) -> tuple[str, ...]:
    """Letter patterns on the sorted operator sites, in execution order."""
    kind = TermKind(kind)
    if kind not in _PATTERNS:
        raise ValueError(f"{kind.name} terms are diagonal and have no subterms")
    return _PATTERNS[kind][SubtermOrder(order)]


def pauli_matrix(s: PauliString) -> np.ndarray:
    if s.n_qubits > MAX_MATRIX_QUBITS:
        raise MemoryError(f"refusing a dense matrix on {s.n_qubits} > {MAX_MATRIX_QUBITS} qubits")
    return s.coefficient * reduce(np.kron, (_MATRICES[ch] for ch in s.letters), np.eye(1, dtype=complex))


def pauli_sum_matrix(strings: Iterable[PauliString], n_qubits: int) -> np.ndarray:
    out = np.zeros((2**n_qubits, 2**n_qubits), dtype=complex)
    for s in strings:
        if s.n_qubits != n_qubits:
            raise ValueError(f"{s!r} has {s.n_qubits} qubits, expected {n_qubits}")
        out += pauli_matrix(s)
    return out
