"""Per-term synthesis of phase-controlled exponentials ``exp(i dt O_term)``.

Three circuit styles:

``STANDARD``
    every subterm carries its own basis changes and a CNOT ladder across its
    whole support, Jordan-Wigner string included.
``STRING_CZ``
    the string parity is computed once per term onto the last string qubit and
    applied as ``Z`` on the top operator qubit through a CZ pair wrapped around
    all subterms; subterm ladders only span the operator qubits.
``ANCILLA``
    like ``STRING_CZ`` but the parity accumulates on a parity ancilla, so the
    string CNOTs of consecutive terms share a target and commute.

Terms passed in here are indexed by spin orbital; ``opts.qubit_order`` decides
which qubit each spin orbital lives on (the identity for ``INTERLEAVED``).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .circuit import Circuit, Gate, cnot, crz, cz, had, phase, ybasis, ybasis_dag
from .hamiltonian import FermionTerm, TermKind
from .pauli import PauliString, SubtermOrder, enumerate_subterms, jw_expand


class Style(enum.Enum):
    STANDARD = "standard"
    STRING_CZ = "cz"
    ANCILLA = "ancilla"


class QubitOrder(enum.Enum):
    INTERLEAVED = "interleaved"
    HALFUP = "halfup"


@dataclass(frozen=True)
class SynthOptions:
    style: Style = Style.ANCILLA
    qubit_order: QubitOrder = QubitOrder.INTERLEAVED
    subterm_order: SubtermOrder = SubtermOrder.OPTIMIZED
    delta_t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "style", Style(self.style))
        object.__setattr__(self, "qubit_order", QubitOrder(self.qubit_order))
        object.__setattr__(self, "subterm_order", SubtermOrder(self.subterm_order))
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t!r}")


def qubit_map(order: QubitOrder, n_spatial_orbitals: int) -> tuple[int, ...]:
    """``perm[j]`` is the qubit holding spin orbital ``j = 2 * orbital + spin``."""
    order = QubitOrder(order)
    n = n_spatial_orbitals
    if order is QubitOrder.INTERLEAVED:
        return tuple(range(2 * n))
    return tuple(i + s * n for i in range(n) for s in (0, 1))


def map_terms(terms: Iterable[FermionTerm], order: QubitOrder, n_orbitals: int) -> list[FermionTerm]:
    """Re-express spin-orbital terms on qubit indices (canonical, signs included)."""
    order = QubitOrder(order)
    terms = list(terms)
    if order is QubitOrder.INTERLEAVED:
        return terms
    if n_orbitals % 2:
        raise ValueError(f"{order.value} qubit order needs an even spin-orbital count, got {n_orbitals}")
    perm = qubit_map(order, n_orbitals // 2)
    return [t.relabel(perm) for t in terms]


@dataclass(frozen=True)
class Footprint:
    """Qubit sets of a term: X/Y sites, shared parity string, extra Z sites."""

    ops: tuple[int, ...]
    string: tuple[int, ...]
    extra: tuple[int, ...]

    @property
    def ops_mask(self) -> int:
        return _mask(self.ops)

    @property
    def string_mask(self) -> int:
        return _mask(self.string)

    @property
    def extra_mask(self) -> int:
        return _mask(self.extra)


def _mask(qs) -> int:
    m = 0
    for q in qs:
        m |= 1 << q
    return m


def footprint(term: FermionTerm) -> Footprint:
    i = term.indices
    if term.kind is TermKind.PP:
        return Footprint((), (), i)
    if term.kind is TermKind.PQQP:
        return Footprint((), (), tuple(sorted(i)))
    if term.kind is TermKind.PQ:
        return Footprint(i, tuple(range(i[0] + 1, i[1])), ())
    if term.kind is TermKind.PQQR:
        p, m, r = i
        return Footprint((p, r), tuple(k for k in range(p + 1, r) if k != m), (m,))
    a, b, c, d = sorted(i)
    return Footprint((a, b, c, d), tuple(range(a + 1, b)) + tuple(range(c + 1, d)), ())


@dataclass(frozen=True)
class TermDecomposition:
    term: FermionTerm
    footprint: Footprint
    subterms: tuple[PauliString, ...]

    @property
    def target(self) -> int | None:
        return self.footprint.ops[-1] if self.footprint.ops else None


def decompose(term: FermionTerm, n_qubits: int, order: SubtermOrder = SubtermOrder.OPTIMIZED) -> TermDecomposition:
    """Jordan-Wigner subterms of a qubit-indexed term in execution order."""
    fp = footprint(term)
    strings = jw_expand(term, n_qubits)
    if fp.ops:
        rank = {p: k for k, p in enumerate(enumerate_subterms(term.kind, order))}
        key = lambda s: (rank["".join(s.letters[q] for q in fp.ops)], s.letters)  # noqa: E731
    else:
        key = lambda s: (len(s.support()), s.letters)  # noqa: E731
    return TermDecomposition(term, fp, tuple(sorted(strings, key=key)))


def _rotation(s: PauliString, sites: Sequence[int], delta_t: float, phase_q: int, tag) -> list[Gate]:
    """``exp(i dt w P)`` controlled on ``phase_q``, laddering parity over ``sites``."""
    angle = delta_t * s.coefficient
    if not sites:
        return [phase(phase_q, angle, tag)]
    pre, post = [], []
    for q in sites:
        ch = s.letters[q]
        if ch == "X":
            pre.append(had(q, tag))
            post.append(had(q, tag))
        elif ch == "Y":
            pre.append(ybasis_dag(q, tag))
            post.append(ybasis(q, tag))
    ladder = [cnot(a, b, tag) for a, b in zip(sites, sites[1:])]
    return pre + ladder + [crz(phase_q, sites[-1], -2.0 * angle, tag)] + ladder[::-1] + post


def _body(d: TermDecomposition, style: Style, delta_t: float, phase_q: int, tag) -> list[Gate]:
    out: list[Gate] = []
    string = set(d.footprint.string)
    for s in d.subterms:
        support = s.support()
        if style is not Style.STANDARD:
            support = tuple(q for q in support if q not in string)
        out += _rotation(s, support, delta_t, phase_q, tag)
    return out


class _AncillaPool:
    """Parity ancillas; a term takes the free ancilla whose previous string differs
    least from its own, so most of the string CNOTs cancel against the uncompute.
    """

    def __init__(self, first: int, size: int):
        self.qubits = list(range(first, first + size))
        self.last: dict[int, frozenset] = {q: frozenset() for q in self.qubits}

    def assign(self, strings: Sequence[tuple[int, ...]]) -> list[int]:
        free = list(self.qubits)
        out = []
        for st in strings:
            st = frozenset(st)
            best = min(free, key=lambda q: (len(st ^ self.last[q]), q))
            free.remove(best)
            self.last[best] = st
            out.append(best)
        return out


def emit_layers(
    layers: Sequence[Sequence[FermionTerm]],
    n_qubits: int,
    style: Style,
    subterm_order: SubtermOrder,
    delta_t: float,
    n_parity: int | None = None,
    first_tag: int = 0,
) -> Circuit:
    """Emit qubit-indexed terms layer by layer.

    For ``ANCILLA`` a layer's terms are interleaved: every string parity is
    computed (one ancilla per term), all bodies run, then the parities are
    uncomputed.  Terms in one layer must be nesting-compatible for that to be
    exact; singleton layers are plain sequential emission.  Other styles always
    emit term by term.
    """
    style = Style(style)
    if style is Style.ANCILLA:
        width = max((sum(1 for t in layer if footprint(t).string) for layer in layers), default=0)
        n_parity = max(n_parity or 1, width, 1)
    else:
        n_parity = 0
    phase_q = n_qubits + n_parity
    pool = _AncillaPool(n_qubits, n_parity) if style is Style.ANCILLA else None
    gates: list[Gate] = []
    tag = first_tag
    for layer in layers:
        decs = []
        for term in layer:
            decs.append((tag, decompose(term, n_qubits, subterm_order)))
            tag += 1
        if style is Style.ANCILLA:
            stringed = [(k, d) for k, d in decs if d.footprint.string]
            ancs = pool.assign([d.footprint.string for _, d in stringed])
            for (k, d), anc in zip(stringed, ancs):
                gates += [cnot(q, anc, (k, "string")) for q in d.footprint.string]
            for (k, d), anc in zip(stringed, ancs):
                gates.append(cz(anc, d.target, (k, "cz")))
            for k, d in decs:
                gates += _body(d, style, delta_t, phase_q, (k, "body"))
            for (k, d), anc in zip(stringed, ancs):
                gates.append(cz(anc, d.target, (k, "cz")))
            for (k, d), anc in zip(stringed, ancs):
                gates += [cnot(q, anc, (k, "string")) for q in reversed(d.footprint.string)]
            continue
        for k, d in decs:
            st = d.footprint.string
            if style is Style.STRING_CZ and st:
                ladder = [cnot(a, b, (k, "string")) for a, b in zip(st, st[1:])]
                gates += ladder
                gates.append(cz(st[-1], d.target, (k, "cz")))
                gates += _body(d, style, delta_t, phase_q, (k, "body"))
                gates.append(cz(st[-1], d.target, (k, "cz")))
                gates += ladder[::-1]
            else:
                gates += _body(d, style, delta_t, phase_q, (k, "body"))
    return Circuit(tuple(gates), n_qubits, n_parity, True)


def synth_term(term: FermionTerm, opts: SynthOptions, n_qubits: int) -> Circuit:
    (mapped,) = map_terms([term], opts.qubit_order, n_qubits)
    if any(i >= n_qubits for i in mapped.indices):
        raise ValueError(f"{term!r} does not fit on {n_qubits} qubits")
    return emit_layers([[mapped]], n_qubits, opts.style, opts.subterm_order, opts.delta_t)


def synth_sequence(terms: Sequence[FermionTerm], opts: SynthOptions, n_qubits: int) -> Circuit:
    """Concatenate per-term circuits in order, unoptimized, tags numbering the terms."""
    mapped = map_terms(terms, opts.qubit_order, n_qubits)
    return emit_layers([[t] for t in mapped], n_qubits, opts.style, opts.subterm_order, opts.delta_t)


def synth_pauli_terms(paulis: Sequence[PauliString], delta_t: float) -> Circuit:
    """Controlled ``prod_k exp(i dt P_k)`` for bare Pauli strings, ladder style."""
    if not paulis:
        return Circuit((), 0, 0, True)
    n = paulis[0].n_qubits
    gates: list[Gate] = []
    for k, s in enumerate(paulis):
        gates += _rotation(s, s.support(), delta_t, n, (k, "body"))
    return Circuit(tuple(gates), n, 0, True)
