"""Term orderings and controlled first/second-order Trotter steps."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .circuit import Circuit, parallel_depth
from .hamiltonian import FermionTerm, SpinOrbitalIntegrals, TermKind, apply_diagonal_fix, classify_terms
from .optimizer import DEFAULT_PASSES, PassReport, nest_schedule, run_pipeline
from .synth import SynthOptions, emit_layers, map_terms


class OrderStrategy(enum.Enum):
    LEXICOGRAPHIC = "lex"
    MAGNITUDE = "magnitude"
    INTERLEAVED = "interleaved"
    SNAKE = "snake"


class TsOrder(enum.IntEnum):
    FIRST = 1
    SECOND = 2


@dataclass(frozen=True)
class TrotterPlan:
    order_strategy: OrderStrategy = OrderStrategy.INTERLEAVED
    ts_order: TsOrder = TsOrder.FIRST
    n_steps: int = 1
    total_time: float = 1.0
    synth: SynthOptions = field(default_factory=SynthOptions)
    diagonal_fix: bool = False
    nest: bool = False
    cancel: bool = False

    def __post_init__(self):
        object.__setattr__(self, "order_strategy", OrderStrategy(self.order_strategy))
        object.__setattr__(self, "ts_order", TsOrder(self.ts_order))
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not self.total_time > 0:
            raise ValueError(f"total_time must be positive, got {self.total_time!r}")

    @property
    def delta_t(self) -> float:
        return self.total_time / self.n_steps

    def to_dict(self) -> dict:
        return {
            "order_strategy": self.order_strategy.value,
            "ts_order": int(self.ts_order),
            "n_steps": self.n_steps,
            "total_time": self.total_time,
            "delta_t": self.delta_t,
            "style": self.synth.style.value,
            "qubit_order": self.synth.qubit_order.value,
            "subterm_order": self.synth.subterm_order.value,
            "diagonal_fix": self.diagonal_fix,
            "nest": self.nest,
            "cancel": self.cancel,
        }


def _snake(pqrs: Sequence[FermionTerm]) -> list[FermionTerm]:
    """Lexicographic in (p, q, r) with s running up and down on alternate r."""
    groups: dict[tuple, list[FermionTerm]] = {}
    for t in sorted(pqrs, key=lambda t: t.indices):
        groups.setdefault(t.indices[:3], []).append(t)
    out = []
    for k, key in enumerate(sorted(groups)):
        out += groups[key] if k % 2 == 0 else groups[key][::-1]
    return out


def order_terms(terms: Sequence[FermionTerm], strategy: OrderStrategy) -> list[FermionTerm]:
    strategy = OrderStrategy(strategy)
    terms = list(terms)
    if strategy is OrderStrategy.LEXICOGRAPHIC:
        return sorted(terms, key=lambda t: t.key)
    if strategy is OrderStrategy.MAGNITUDE:
        return sorted(terms, key=lambda t: (-abs(t.coefficient), t.key))
    diag = sorted((t for t in terms if t.kind.diagonal), key=lambda t: t.key)
    pqrs = [t for t in terms if t.kind is TermKind.PQRS]
    hops: dict[tuple[int, int], list[FermionTerm]] = {}
    for t in terms:
        if t.kind is TermKind.PQ:
            hops.setdefault(t.indices, []).insert(0, t)
        elif t.kind is TermKind.PQQR:
            hops.setdefault((t.indices[0], t.indices[2]), []).append(t)
    middle = []
    for pair in sorted(hops):
        block = hops[pair]
        head = [t for t in block if t.kind is TermKind.PQ]
        middle += head + sorted((t for t in block if t.kind is TermKind.PQQR), key=lambda t: t.indices)
    if strategy is OrderStrategy.SNAKE:
        return diag + middle + _snake(pqrs)
    return diag + middle + [t for layer in nest_schedule(pqrs) for t in layer]


@dataclass
class CompiledStep:
    """A compiled step plus the qubit-indexed term order it realizes (one sweep)."""

    circuit: Circuit
    terms: list[FermionTerm]
    layers: list[list[FermionTerm]]
    plan: TrotterPlan
    report: PassReport
    nesting_applied: bool = False
    n_qubits: int = 0


def _assemble(layers, plan: TrotterPlan, n_qubits: int) -> Circuit:
    o = plan.synth
    if plan.ts_order is TsOrder.FIRST:
        return emit_layers(layers, n_qubits, o.style, o.subterm_order, plan.delta_t)
    backward = [layer[::-1] for layer in reversed(layers)]
    return emit_layers(list(layers) + backward, n_qubits, o.style, o.subterm_order, 0.5 * plan.delta_t)


def _finish(circuit: Circuit, plan: TrotterPlan) -> tuple[Circuit, PassReport]:
    return run_pipeline(circuit, DEFAULT_PASSES if plan.cancel else ())


def step_terms(integrals: SpinOrbitalIntegrals, plan: TrotterPlan) -> list[FermionTerm]:
    """Qubit-indexed terms of the (optionally corrected) Hamiltonian, in strategy order."""
    if plan.diagonal_fix:
        integrals = apply_diagonal_fix(integrals, plan.delta_t)
    terms = map_terms(classify_terms(integrals), plan.synth.qubit_order, integrals.n_orbitals)
    return order_terms(terms, plan.order_strategy)


def compile_terms(terms: Sequence[FermionTerm], n_qubits: int, plan: TrotterPlan) -> CompiledStep:
    """Compile already ordered qubit-indexed terms.

    With ``plan.nest`` the terms are packed into compatible layers (first fit in
    the given order).  The nested circuit is kept only when its depth does not
    exceed the unnested one; ``nesting_applied`` records the outcome.
    """
    flat = [[t] for t in terms]
    circuit, report = _finish(_assemble(flat, plan, n_qubits), plan)
    layers, applied = flat, False
    if plan.nest and terms:
        nested_layers = nest_schedule(terms, priority="given")
        if len(nested_layers) < len(terms):
            nested, nreport = _finish(_assemble(nested_layers, plan, n_qubits), plan)
            if parallel_depth(nested) <= parallel_depth(circuit):
                circuit, report, layers, applied = nested, nreport, nested_layers, True
    order = [t for layer in layers for t in layer]
    return CompiledStep(circuit, order, layers, plan, report, applied, n_qubits)


def compile_step(integrals: SpinOrbitalIntegrals, plan: TrotterPlan) -> CompiledStep:
    return compile_terms(step_terms(integrals, plan), integrals.n_orbitals, plan)


def build_trotter_step(integrals: SpinOrbitalIntegrals, plan: TrotterPlan) -> Circuit:
    """One controlled Trotter step ``~exp(i H dt)``, ``dt = total_time / n_steps``."""
    return compile_step(integrals, plan).circuit
