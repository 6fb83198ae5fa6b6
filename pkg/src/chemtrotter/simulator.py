"""Dense simulation: circuit unitaries, exact spectra, Trotter energies, scaling fits."""
from __future__ import annotations

import logging
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from .circuit import Circuit, Gate, GateKind
from .hamiltonian import FermionTerm, SpinOrbitalIntegrals, classify_terms, terms_to_integrals
from .pauli import PauliString, jw_expand, pauli_matrix
from .synth import QubitOrder, map_terms, synth_pauli_terms
from .trotter import OrderStrategy, TrotterPlan, compile_step

log = logging.getLogger(__name__)

MAX_QUBITS = 14
MAX_ORBITALS = 12
DEGENERACY_TOL = 1e-10
OVERLAP_THRESHOLD = 0.5

_CODES = {
    GateKind.CNOT: 0, GateKind.HAD: 1, GateKind.YBASIS: 2, GateKind.YBASIS_DAG: 3,
    GateKind.CZ: 4, GateKind.CRZ: 5, GateKind.PHASE: 6,
}


def _guard(n: int):
    if n > MAX_QUBITS:
        raise MemoryError(f"dense simulation of {n} qubits exceeds the {MAX_QUBITS}-qubit limit")


def _encode(gates: Sequence[Gate]):
    n = len(gates)
    codes = np.empty(n, dtype=np.int64)
    qa = np.full(n, -1, dtype=np.int64)
    qb = np.full(n, -1, dtype=np.int64)
    angles = np.zeros(n)
    for i, g in enumerate(gates):
        codes[i] = _CODES[g.kind]
        qa[i] = g.qubits[0] if g.qubits else -1
        if len(g.qubits) > 1:
            qb[i] = g.qubits[1]
        if g.angle is not None:
            angles[i] = g.angle
    return codes, qa, qb, angles


def _project_phase(c: Circuit, phase_state: int) -> list[Gate]:
    """Rewrite gates for a fixed phase-ancilla basis state, dropping that wire.

    Uncontrolled rotations use control ``-1``; a scalar phase is ``PHASE`` on ``-1``.
    """
    pq = c.phase_qubit
    on = bool(phase_state)
    out: list[Gate] = []
    for i, g in enumerate(c.gates):
        if pq is None or pq not in g.qubits:
            out.append(g)
            continue
        k = g.kind
        if k is GateKind.CRZ and g.qubits[0] == pq:
            if on:
                out.append(Gate(GateKind.CRZ, (-1, g.qubits[1]), g.angle))
        elif k is GateKind.CRZ:
            out.append(Gate(GateKind.PHASE, (g.qubits[0],), 0.5 * g.angle if on else -0.5 * g.angle))
        elif k is GateKind.PHASE:
            if on:
                out.append(Gate(GateKind.PHASE, (-1,), g.angle))
        elif k is GateKind.CZ:
            if on:
                other = g.qubits[1] if g.qubits[0] == pq else g.qubits[0]
                out.append(Gate(GateKind.PHASE, (other,), math.pi))
        elif k is GateKind.CNOT and g.qubits[0] == pq:
            if on:
                t = g.qubits[1]
                out += [Gate(GateKind.HAD, (t,)), Gate(GateKind.PHASE, (t,), math.pi), Gate(GateKind.HAD, (t,))]
        else:
            raise ValueError(f"gate {i} ({k.value}) acts non-diagonally on the phase ancilla")
    return out


def _run(gates: Sequence[Gate], n: int, state: np.ndarray) -> np.ndarray:
    if gates:
        kernels.apply_gates(state, *_encode(gates), n)
    return state


def full_unitary(c: Circuit) -> np.ndarray:
    """Unitary on the whole registry, phase ancilla included (qubit 0 most significant)."""
    n = c.n_qubits
    _guard(n)
    return _run(c.gates, n, np.eye(2**n, dtype=complex))


def circuit_unitary(c: Circuit, phase_state: int = 1) -> np.ndarray:
    """Unitary on system and parity qubits with the phase ancilla fixed to ``|phase_state>``."""
    if phase_state not in (0, 1):
        raise ValueError("phase_state must be 0 or 1")
    n = c.n_system + c.n_parity
    _guard(n + (1 if c.has_phase else 0))
    return _run(_project_phase(c, phase_state), n, np.eye(2**n, dtype=complex))


def system_unitary(c: Circuit, phase_state: int = 1, leak_tol: float = 1e-10) -> np.ndarray:
    """Unitary on the system qubits with parity ancillas starting in ``|0>``.

    Raises when the ancillas do not return to ``|0>`` (amplitude above ``leak_tol``).
    """
    if phase_state not in (0, 1):
        raise ValueError("phase_state must be 0 or 1")
    n = c.n_system + c.n_parity
    _guard(n + (1 if c.has_phase else 0))
    stride = 2**c.n_parity
    state = np.zeros((2**n, 2**c.n_system), dtype=complex)
    state[np.arange(2**c.n_system) * stride, np.arange(2**c.n_system)] = 1.0
    _run(_project_phase(c, phase_state), n, state)
    if c.n_parity:
        blocks = state.reshape(2**c.n_system, stride, -1)
        leak = float(np.abs(blocks[:, 1:, :]).max(initial=0.0))
        if leak > leak_tol:
            raise ValueError(f"parity ancillas left in an excited state (amplitude {leak:.3g})")
        return np.ascontiguousarray(blocks[:, 0, :])
    return state


def _fermion_operators(n: int) -> list[sp.csr_matrix]:
    z = sp.diags([1.0, -1.0])
    eye = sp.identity(2)
    lower = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    ops = []
    for j in range(n):
        factors = [z] * j + [lower] + [eye] * (n - j - 1)
        ops.append(reduce(lambda a, b: sp.kron(a, b, format="csr"), factors).tocsr())
    return ops


def hamiltonian_matrix(integrals: SpinOrbitalIntegrals) -> sp.csr_matrix:
    """Sparse Jordan-Wigner matrix of the electronic Hamiltonian (no core energy)."""
    n = integrals.n_orbitals
    if n > MAX_ORBITALS:
        raise MemoryError(f"{n} spin orbitals exceed the {MAX_ORBITALS}-orbital limit")
    c = _fermion_operators(n)
    cd = [op.T.tocsr() for op in c]
    h = sp.csr_matrix((2**n, 2**n))
    t = integrals.t
    for p in range(n):
        for q in range(n):
            if t[p, q] != 0.0:
                h = h + t[p, q] * (cd[p] @ c[q])
    for (p, q, r, s), value in integrals.v.items():
        if value != 0.0:
            h = h + 0.5 * value * (cd[p] @ cd[q] @ c[r] @ c[s])
    return h.tocsr()


@dataclass(frozen=True)
class ExactSpectrum:
    energies: np.ndarray
    ground_vector: np.ndarray
    degenerate: bool

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])


def exact_spectrum(integrals: SpinOrbitalIntegrals) -> ExactSpectrum:
    h = hamiltonian_matrix(integrals).toarray()
    if not np.allclose(h, h.conj().T, atol=1e-12):
        raise ValueError("integrals do not define a Hermitian Hamiltonian")
    w, v = np.linalg.eigh(h)
    degenerate = len(w) > 1 and w[1] - w[0] < DEGENERACY_TOL
    return ExactSpectrum(w, v[:, 0], bool(degenerate))


def reference_spectrum(integrals: SpinOrbitalIntegrals, qubit_order: QubitOrder = QubitOrder.INTERLEAVED) -> ExactSpectrum:
    """Exact spectrum with the ground vector expressed in the compiled qubit layout."""
    if QubitOrder(qubit_order) is QubitOrder.INTERLEAVED:
        return exact_spectrum(integrals)
    terms = map_terms(classify_terms(integrals), qubit_order, integrals.n_orbitals)
    return exact_spectrum(terms_to_integrals(terms, integrals.n_orbitals))


@dataclass(frozen=True)
class SpectralResult:
    exact_ground_energy: float
    trotter_energy: float
    error: float
    overlap: float
    ambiguous: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def _energies_from_unitary(u: np.ndarray, delta_t: float, e_ref: float) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eig(u)
    shifted = np.angle(w * np.exp(-1j * e_ref * delta_t)) / delta_t + e_ref
    return shifted, v


def trotter_ground_energy(
    step: Circuit | np.ndarray,
    delta_t: float,
    reference_ground_vector: np.ndarray,
    exact_ground_energy: float,
) -> SpectralResult:
    """Ground energy of one controlled step ``~exp(i H dt)`` by eigendecomposition.

    The eigenvector with the largest overlap with the reference ground state is
    chosen; its eigenphase is unwrapped around ``exact_ground_energy`` so that
    ``|E - E0| dt < pi`` is all that is needed.  Overlap at or below 0.5 flags
    the result as ambiguous.
    """
    u = system_unitary(step) if isinstance(step, Circuit) else np.asarray(step)
    energies, vecs = _energies_from_unitary(u, delta_t, exact_ground_energy)
    ref = np.asarray(reference_ground_vector, dtype=complex)
    ref = ref / np.linalg.norm(ref)
    overlaps = np.abs(ref.conj() @ vecs) ** 2
    k = int(np.argmax(overlaps))
    e = float(energies[k])
    return SpectralResult(
        float(exact_ground_energy), e, abs(e - exact_ground_energy), float(overlaps[k]),
        bool(overlaps[k] <= OVERLAP_THRESHOLD),
    )


def lowest_trotter_energy(u: np.ndarray, delta_t: float, e_ref: float = 0.0) -> float:
    """Smallest eigen-energy of a step unitary, unwrapped around ``e_ref``."""
    return float(_energies_from_unitary(u, delta_t, e_ref)[0].min())


def _term_matrix(term, n_qubits: int | None) -> np.ndarray:
    if isinstance(term, FermionTerm):
        strings = jw_expand(term, n_qubits)
        dim = 2**n_qubits
        return sum((pauli_matrix(s) for s in strings), np.zeros((dim, dim), dtype=complex))
    if isinstance(term, PauliString):
        return pauli_matrix(term)
    return np.asarray(term, dtype=complex)


def delta_operator(terms: Sequence, order: str = "product", delta_t: float = 1.0, n_qubits: int | None = None) -> np.ndarray:
    """``i dt/2 sum_{j<k} [H_j, H_k]`` for the first-order product.

    Terms may be Hermitian matrices, Pauli strings or qubit-indexed fermion
    terms (then ``n_qubits`` is required).  ``order="product"`` means ``terms[0]``
    is the leftmost factor of ``exp(i H_1 dt) exp(i H_2 dt) ...``;
    ``order="execution"`` means ``terms[0]`` is applied first, as in a circuit.
    """
    if order not in ("product", "execution"):
        raise ValueError(f"order must be 'product' or 'execution', got {order!r}")
    mats = [_term_matrix(t, n_qubits) for t in terms]
    if order == "execution":
        mats = mats[::-1]
    if not mats:
        return np.zeros((0, 0), dtype=complex)
    out = np.zeros_like(mats[0])
    running = np.zeros_like(mats[0])
    for m in mats:
        out += running @ m - m @ running
        running += m
    return 0.5j * delta_t * out


def _sparse_term(term: FermionTerm, c, cd) -> sp.csr_matrix:
    k, idx = term.kind.name, term.indices
    if k == "PP":
        return term.coefficient * (cd[idx[0]] @ c[idx[0]])
    if k == "PQQP":
        p, q = idx
        return term.coefficient * (cd[p] @ c[p] @ cd[q] @ c[q])
    if k == "PQ":
        x = cd[idx[0]] @ c[idx[1]]
    elif k == "PQQR":
        p, q, r = idx
        x = cd[p] @ cd[q] @ c[q] @ c[r]
    else:
        p, q, r, s = idx
        x = cd[p] @ cd[q] @ c[r] @ c[s]
    return term.coefficient * (x + x.T)


def delta_expectation(terms: Sequence[FermionTerm], state: np.ndarray, delta_t: float = 1.0, n_qubits: int | None = None) -> complex:
    """``<psi|Delta|psi>`` for qubit-indexed terms in product order, without dense matrices.

    With ``phi_j = H_j psi`` the sum is ``i dt/2 sum_{j<k} (<phi_j|phi_k> - <phi_k|phi_j>)``.
    """
    n = n_qubits or int(round(math.log2(len(state))))
    c = _fermion_operators(n)
    cd = [op.T.tocsr() for op in c]
    psi = np.asarray(state, dtype=complex)
    running = np.zeros_like(psi)
    total = 0j
    for t in terms:
        phi = _sparse_term(t, c, cd) @ psi
        g = np.vdot(running, phi)
        total += g - g.conjugate()
        running += phi
    return 0.5j * delta_t * total


def error_scaling_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares ``log10(error) = intercept + slope * log10(n)``; returns (slope, intercept)."""
    good = []
    for n, err in points:
        if not err > 0 or not np.isfinite(err):
            warnings.warn(f"excluding nonpositive error {err!r} at n={n}", RuntimeWarning, stacklevel=2)
            continue
        good.append((n, err))
    if len(good) < 3:
        raise ValueError(f"need at least 3 positive points for a fit, got {len(good)}")
    x = np.log10([n for n, _ in good])
    y = np.log10([e for _, e in good])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


COUNTEREXAMPLE_TERMS = (PauliString("X", 1.0), PauliString("Z", 1.0), PauliString("X", -1.0), PauliString("Z", -1.0))


def pauli_step_errors(
    paulis: Sequence[PauliString], n_values: Sequence[int], total_time: float = 1.0
) -> list[tuple[int, float]]:
    """Ground-energy error of the compiled first-order step versus the exact sum, per n.

    Uses the lowest eigen-energy, so it also works when the exact ground state
    is degenerate.
    """
    nq = paulis[0].n_qubits
    dim = 2**nq
    h = sum((pauli_matrix(s) for s in paulis), np.zeros((dim, dim), dtype=complex))
    e0 = float(np.linalg.eigvalsh(h)[0])
    out = []
    for n in n_values:
        dt = total_time / n
        u = system_unitary(synth_pauli_terms(paulis, dt))
        out.append((int(n), abs(lowest_trotter_energy(u, dt, e0) - e0)))
    return out


def counterexample_experiment(n_values: Sequence[int] = (4, 8, 16, 32, 64), paulis=COUNTEREXAMPLE_TERMS) -> float:
    """Fitted log-log slope of the ground-energy error for ``X, Z, -X, -Z`` (exact H = 0)."""
    return error_scaling_fit(pauli_step_errors(paulis, n_values))[0]


@dataclass(frozen=True)
class SweepRow:
    n: int
    ordering: str
    fix: bool
    style: str
    error_hartree: float


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CHEMTROTTER_WORKERS", "1")))
    except ValueError:
        return 1


def sweep(
    integrals: SpinOrbitalIntegrals,
    n_values: Sequence[int],
    orderings: Sequence[OrderStrategy] = (OrderStrategy.LEXICOGRAPHIC, OrderStrategy.INTERLEAVED),
    fixes: Sequence[bool] = (False, True),
    base: TrotterPlan | None = None,
    workers: int | None = None,
) -> list[SweepRow]:
    """Ground-energy Trotter error for every (ordering, fix, n); rows in input order."""
    base = base or TrotterPlan()
    exact = reference_spectrum(integrals, base.synth.qubit_order)
    if exact.degenerate:
        log.warning("exact ground state is degenerate; matched energies may be ambiguous")
    jobs = [(o, f, n) for o in orderings for f in fixes for n in n_values]

    def run(job):
        o, f, n = job
        plan = replace(base, order_strategy=OrderStrategy(o), diagonal_fix=bool(f), n_steps=int(n))
        res = trotter_ground_energy(build_step_circuit(integrals, plan), plan.delta_t, exact.ground_vector, exact.ground_energy)
        return SweepRow(int(n), OrderStrategy(o).value, bool(f), plan.synth.style.value, res.error)

    with ThreadPoolExecutor(max_workers=workers or _workers()) as pool:
        return list(pool.map(run, jobs))


def build_step_circuit(integrals: SpinOrbitalIntegrals, plan: TrotterPlan) -> Circuit:
    return compile_step(integrals, plan).circuit
