"""Gate cancellation passes and the nesting scheduler."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .circuit import Circuit, Gate, GateKind, gate_counts, parallel_depth
from .hamiltonian import FermionTerm
from .synth import footprint

log = logging.getLogger(__name__)

MAX_SWEEPS = 100

_INVERSE_KIND = {
    GateKind.CNOT: GateKind.CNOT,
    GateKind.HAD: GateKind.HAD,
    GateKind.CZ: GateKind.CZ,
    GateKind.YBASIS: GateKind.YBASIS_DAG,
    GateKind.YBASIS_DAG: GateKind.YBASIS,
}


def _cancels(a: Gate, b: Gate) -> bool:
    if _INVERSE_KIND.get(a.kind) is not b.kind:
        return False
    if a.kind is GateKind.CZ:
        return set(a.qubits) == set(b.qubits)
    return a.qubits == b.qubits


def _adjacent_sweep(gates: Sequence[Gate]) -> tuple[list[Gate], int]:
    out: list[Gate | None] = []
    stacks: dict[int, list[int]] = {}
    pairs = 0
    for g in gates:
        tops = {stacks[q][-1] if stacks.get(q) else None for q in g.qubits}
        if len(tops) == 1:
            (j,) = tops
            if j is not None and _cancels(out[j], g) and set(out[j].qubits) == set(g.qubits):
                for q in g.qubits:
                    stacks[q].pop()
                out[j] = None
                pairs += 1
                continue
        for q in g.qubits:
            stacks.setdefault(q, []).append(len(out))
        out.append(g)
    return [g for g in out if g is not None], pairs


def _z_type_on(g: Gate, q: int) -> bool:
    """True when ``g`` is diagonal on qubit ``q`` (commutes with a CNOT controlled there)."""
    if g.kind is GateKind.CNOT:
        return g.qubits[0] == q
    return g.kind in (GateKind.CZ, GateKind.CRZ, GateKind.PHASE)


def _commuting_sweep(gates: Sequence[Gate]) -> tuple[list[Gate], int]:
    out: list[Gate | None] = []
    wires: dict[int, list[int]] = {}
    pairs = 0
    for g in gates:
        if g.kind is GateKind.CNOT:
            c, t = g.qubits
            match = None
            wire_t = wires.get(t, [])
            for j in reversed(wire_t):
                h = out[j]
                if h.kind is not GateKind.CNOT or h.qubits[1] != t:
                    break
                if h.qubits[0] == c:
                    match = j
                    break
            if match is not None:
                wire_c = wires[c]
                k = len(wire_c) - 1
                while wire_c[k] != match and _z_type_on(out[wire_c[k]], c):
                    k -= 1
                if wire_c[k] == match:
                    out[match] = None
                    wire_c.pop(k)
                    wire_t.pop(len(wire_t) - 1 - wire_t[::-1].index(match))
                    pairs += 1
                    continue
        for q in g.qubits:
            wires.setdefault(q, []).append(len(out))
        out.append(g)
    return [g for g in out if g is not None], pairs


def _fixed_point(c: Circuit, sweep: Callable, name: str) -> tuple[Circuit, int]:
    gates, total = list(c.gates), 0
    for _ in range(MAX_SWEEPS):
        gates, pairs = sweep(gates)
        total += pairs
        if not pairs:
            return c.with_gates(gates), total
    log.warning("%s did not converge within %d sweeps", name, MAX_SWEEPS)
    return c.with_gates(gates), total


def cancel_adjacent(c: Circuit) -> Circuit:
    """Remove self-inverse pairs (CNOT, HAD, CZ, YBASIS/YBASIS_DAG) with nothing between them on their qubits."""
    return _fixed_point(c, _adjacent_sweep, "cancel_adjacent")[0]


def cancel_commuting_cnots(c: Circuit) -> Circuit:
    """Cancel equal CNOTs separated only by CNOTs into the same target.

    Gates in between on the control wire are allowed when they are diagonal
    there, so ``CNOT(b, A)`` pairs meet across a run of other parity CNOTs
    into ``A`` regardless of their order.
    """
    return _fixed_point(c, _commuting_sweep, "cancel_commuting_cnots")[0]


_PASSES = {
    "cancel_adjacent": _adjacent_sweep,
    "cancel_commuting_cnots": _commuting_sweep,
}

DEFAULT_PASSES = ("cancel_adjacent", "cancel_commuting_cnots", "cancel_adjacent")


@dataclass
class PassReport:
    gates_before: dict[str, int] = field(default_factory=dict)
    gates_after: dict[str, int] = field(default_factory=dict)
    depth_before: int = 0
    depth_after: int = 0
    cancellations: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gates_before": dict(self.gates_before),
            "gates_after": dict(self.gates_after),
            "depth_before": self.depth_before,
            "depth_after": self.depth_after,
            "cancellations": dict(self.cancellations),
        }


def run_pipeline(c: Circuit, passes: Sequence = DEFAULT_PASSES) -> tuple[Circuit, PassReport]:
    """Apply passes (names or ``Circuit -> Circuit`` callables) in order.

    Depths are measured with the phase fan-out rule.  Cancellations are
    counted in removed gate pairs per pass name.
    """
    report = PassReport(gates_before=gate_counts(c), depth_before=parallel_depth(c))
    if not passes:
        report.gates_after = dict(report.gates_before)
        report.depth_after = report.depth_before
        return c, report
    for p in passes:
        if isinstance(p, str):
            if p not in _PASSES:
                raise ValueError(f"unknown pass {p!r}; choose from {sorted(_PASSES)}")
            c, pairs = _fixed_point(c, _PASSES[p], p)
            name = p
        else:
            n_before = len(c)
            c = p(c)
            name = getattr(p, "__name__", repr(p))
            pairs = (n_before - len(c)) // 2
        report.cancellations[name] = report.cancellations.get(name, 0) + pairs
    report.gates_after = gate_counts(c)
    report.depth_after = parallel_depth(c)
    return c, report


def compatible(a: FermionTerm, b: FermionTerm) -> bool:
    """Whether two qubit-indexed terms may run nested (concurrently).

    Their operator and extra-Z sites must be disjoint, and each term's X/Y sites
    must meet the other's parity string an even number of times.
    """
    fa, fb = footprint(a), footprint(b)
    if (fa.ops_mask | fa.extra_mask) & (fb.ops_mask | fb.extra_mask):
        return False
    return (fa.ops_mask & fb.string_mask).bit_count() % 2 == 0 and (
        fb.ops_mask & fa.string_mask
    ).bit_count() % 2 == 0


def nest_schedule(terms: Sequence[FermionTerm], priority: str = "magnitude") -> list[list[FermionTerm]]:
    """Greedy first-fit packing of qubit-indexed terms into mutually compatible layers.

    ``priority="magnitude"`` visits terms by decreasing |coefficient| (stable);
    ``"given"`` keeps the input order.  Layers are returned in creation order;
    their concatenation is the emitted term order.
    """
    if priority == "magnitude":
        seq = sorted(terms, key=lambda t: -abs(t.coefficient))
    elif priority == "given":
        seq = list(terms)
    else:
        raise ValueError(f"unknown priority {priority!r}")
    fps = {}
    layers: list[list[FermionTerm]] = []
    occupied: list[int] = []
    for term in seq:
        fp = fps[id(term)] = footprint(term)
        busy = fp.ops_mask | fp.extra_mask
        for k, layer in enumerate(layers):
            if occupied[k] & busy:
                continue
            if all(compatible(term, other) for other in layer):
                layer.append(term)
                occupied[k] |= busy
                break
        else:
            layers.append([term])
            occupied.append(busy)
    return layers
