"""Gate-level IR for controlled Trotter steps.

Qubit registry: system qubits ``0 .. n_system-1``, then ``n_parity`` parity
ancillas, then (optionally) the phase-estimation ancilla as the last qubit.
Every rotation is controlled by the phase ancilla.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels


class GateKind(str, enum.Enum):
    CNOT = "CNOT"
    HAD = "HAD"
    YBASIS = "YBASIS"
    YBASIS_DAG = "YBASIS_DAG"
    CZ = "CZ"
    CRZ = "CRZ"
    PHASE = "PHASE"

    def __str__(self):
        return self.value


_ARITY = {
    GateKind.CNOT: 2, GateKind.HAD: 1, GateKind.YBASIS: 1, GateKind.YBASIS_DAG: 1,
    GateKind.CZ: 2, GateKind.CRZ: 2, GateKind.PHASE: 1,
}
_ANGLED = {GateKind.CRZ, GateKind.PHASE}


class Gate(NamedTuple):
    """One gate.  ``CRZ`` is ``(control, target)``; its target sees ``diag(e^{-ia/2}, e^{ia/2})``.
    ``PHASE`` is ``diag(1, e^{ia})``.  ``tag`` is an optional ``(term, role)`` provenance pair.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    angle: float | None = None
    tag: tuple[int, str] | None = None

    def same_op(self, other: "Gate") -> bool:
        return self.kind is other.kind and self.qubits == other.qubits and self.angle == other.angle

    def inverse(self) -> "Gate":
        if self.kind is GateKind.YBASIS:
            return self._replace(kind=GateKind.YBASIS_DAG)
        if self.kind is GateKind.YBASIS_DAG:
            return self._replace(kind=GateKind.YBASIS)
        if self.kind in _ANGLED:
            return self._replace(angle=-self.angle)
        return self


def cnot(control: int, target: int, tag=None) -> Gate:
    if control == target:
        raise ValueError(f"CNOT control and target coincide ({control})")
    return Gate(GateKind.CNOT, (control, target), None, tag)


def cz(a: int, b: int, tag=None) -> Gate:
    if a == b:
        raise ValueError(f"CZ on a single qubit ({a})")
    return Gate(GateKind.CZ, (a, b), None, tag)


def crz(control: int, target: int, angle: float, tag=None) -> Gate:
    if control == target:
        raise ValueError(f"CRZ control and target coincide ({control})")
    return Gate(GateKind.CRZ, (control, target), float(angle), tag)


def had(q: int, tag=None) -> Gate:
    return Gate(GateKind.HAD, (q,), None, tag)


def ybasis(q: int, tag=None) -> Gate:
    return Gate(GateKind.YBASIS, (q,), None, tag)


def ybasis_dag(q: int, tag=None) -> Gate:
    return Gate(GateKind.YBASIS_DAG, (q,), None, tag)


def phase(q: int, angle: float, tag=None) -> Gate:
    return Gate(GateKind.PHASE, (q,), float(angle), tag)


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...] = ()
    n_system: int = 0
    n_parity: int = 0
    has_phase: bool = True
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        nq = self.n_qubits
        for i, g in enumerate(gates):
            if len(g.qubits) != _ARITY[g.kind]:
                raise ValueError(f"gate {i} ({g.kind}) expects {_ARITY[g.kind]} qubits, got {g.qubits}")
            if len(set(g.qubits)) != len(g.qubits):
                raise ValueError(f"gate {i} ({g.kind}) repeats a qubit: {g.qubits}")
            for q in g.qubits:
                if not 0 <= q < nq:
                    raise ValueError(f"gate {i} ({g.kind}) references qubit {q} outside [0, {nq})")
            if (g.angle is None) == (g.kind in _ANGLED):
                raise ValueError(f"gate {i} ({g.kind}) has a malformed angle {g.angle!r}")

    @property
    def n_qubits(self) -> int:
        return self.n_system + self.n_parity + (1 if self.has_phase else 0)

    @property
    def has_parity_ancilla(self) -> bool:
        return self.n_parity > 0

    @property
    def parity_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.n_system, self.n_system + self.n_parity))

    @property
    def phase_qubit(self) -> int | None:
        return self.n_system + self.n_parity if self.has_phase else None

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def with_gates(self, gates: Iterable[Gate]) -> "Circuit":
        return Circuit(tuple(gates), self.n_system, self.n_parity, self.has_phase, dict(self.meta))

    def widened(self, n_parity: int) -> "Circuit":
        """Same circuit on a registry with ``n_parity`` parity ancillas (phase qubit moves)."""
        if n_parity < self.n_parity:
            raise ValueError("cannot shrink the parity pool")
        if n_parity == self.n_parity:
            return self
        old_phase, new_phase = self.phase_qubit, self.n_system + n_parity
        remap = lambda q: new_phase if q == old_phase else q  # noqa: E731
        gates = [g._replace(qubits=tuple(remap(q) for q in g.qubits)) for g in self.gates]
        return Circuit(tuple(gates), self.n_system, n_parity, self.has_phase, dict(self.meta))

    def __add__(self, other: "Circuit") -> "Circuit":
        width = max(self.n_parity, other.n_parity)
        a, b = self.widened(width), other.widened(width)
        if (a.n_system, a.has_phase) != (b.n_system, b.has_phase):
            raise ValueError("cannot concatenate circuits over different registries")
        return a.with_gates(a.gates + b.gates)

    def inverse(self) -> "Circuit":
        return self.with_gates(g.inverse() for g in reversed(self.gates))

    def untagged(self) -> "Circuit":
        return self.with_gates(g._replace(tag=None) for g in self.gates)

    def to_text(self) -> str:
        lines = [f"qubits {self.n_system} {self.n_parity} {int(self.has_phase)}"]
        for g in self.gates:
            parts = [g.kind.value, *map(str, g.qubits)]
            if g.angle is not None:
                parts.append(repr(g.angle))
            if g.tag is not None:
                parts.append(f"# term={g.tag[0]} role={g.tag[1]}")
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        header = None
        gates = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            body, _, comment = raw.partition("#")
            tokens = body.split()
            if not tokens:
                continue
            try:
                if header is None:
                    if tokens[0] != "qubits" or len(tokens) != 4:
                        raise ValueError("expected header 'qubits <n_system> <n_parity> <phase:0|1>'")
                    header = (int(tokens[1]), int(tokens[2]), bool(int(tokens[3])))
                    continue
                kind = GateKind(tokens[0])
                arity = _ARITY[kind]
                qubits = tuple(int(x) for x in tokens[1:1 + arity])
                rest = tokens[1 + arity:]
                angle = float(rest.pop(0)) if kind in _ANGLED and rest else None
                if len(qubits) != arity or rest:
                    raise ValueError(f"wrong operand count for {kind.value}")
                tag = None
                if comment.strip():
                    fields = dict(item.split("=", 1) for item in comment.split())
                    tag = (int(fields["term"]), fields["role"])
                gates.append(Gate(kind, qubits, angle, tag))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"line {lineno}: {exc}: {raw.strip()!r}") from None
        if header is None:
            return cls((), 0, 0, False)
        return cls(tuple(gates), *header)


def gate_counts(c: Circuit) -> dict[str, int]:
    counts = Counter(g.kind.value for g in c.gates)
    out = {k.value: counts.get(k.value, 0) for k in GateKind}
    out["total"] = len(c.gates)
    return out


def _phase_controlled(g: Gate, phase_q: int | None) -> bool:
    if phase_q is None or phase_q not in g.qubits:
        return False
    if g.kind is GateKind.CRZ:
        return g.qubits[0] == phase_q
    return g.kind in (GateKind.CZ, GateKind.PHASE)


def _wires(c: Circuit, phase_fanout_rule: bool) -> tuple[np.ndarray, np.ndarray]:
    n = len(c.gates)
    qa = np.full(n, -1, dtype=np.int64)
    qb = np.full(n, -1, dtype=np.int64)
    phase_q = c.phase_qubit
    for i, g in enumerate(c.gates):
        qs = g.qubits
        if phase_fanout_rule and _phase_controlled(g, phase_q):
            qs = tuple(q for q in qs if q != phase_q)
        if qs:
            qa[i] = qs[0]
            if len(qs) > 1:
                qb[i] = qs[1]
    return qa, qb


def schedule_layers(c: Circuit, phase_fanout_rule: bool = True) -> np.ndarray:
    """ASAP layer (1-based) of every gate.

    A gate lands one layer after the latest gate sharing a qubit with it.  With
    ``phase_fanout_rule`` the phase ancilla is not a shared resource for gates
    it controls, so concurrent controlled rotations only collide on targets.
    """
    qa, qb = _wires(c, phase_fanout_rule)
    return kernels.asap_layers(qa, qb, c.n_qubits)


def parallel_depth(c: Circuit, phase_fanout_rule: bool = True) -> int:
    if not c.gates:
        return 0
    return int(schedule_layers(c, phase_fanout_rule).max())


def layered(c: Circuit, phase_fanout_rule: bool = True) -> Circuit:
    """The circuit re-emitted layer by layer (stable within a layer)."""
    layers = schedule_layers(c, phase_fanout_rule)
    order = np.argsort(layers, kind="stable")
    return c.with_gates(c.gates[i] for i in order)
