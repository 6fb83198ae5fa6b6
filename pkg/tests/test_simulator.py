import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm

import oracles
from chemtrotter.circuit import Circuit, cnot, had
from chemtrotter.fixtures import h2_like_model
from chemtrotter.hamiltonian import FermionTerm, SpinOrbitalIntegrals, TermKind, classify_terms
from chemtrotter.io import sweep_csv
from chemtrotter.pauli import PauliString
from chemtrotter.simulator import (
    COUNTEREXAMPLE_TERMS,
    counterexample_experiment,
    circuit_unitary,
    delta_expectation,
    delta_operator,
    error_scaling_fit,
    exact_spectrum,
    full_unitary,
    hamiltonian_matrix,
    pauli_step_errors,
    reference_spectrum,
    sweep,
    system_unitary,
    trotter_ground_energy,
)
from chemtrotter.synth import QubitOrder, SynthOptions, synth_pauli_terms
from chemtrotter.trotter import OrderStrategy, TrotterPlan, compile_terms
from test_circuit import circuits
from test_hamiltonian import hermitian_integrals
from test_pauli import canonical_terms


def test_single_hadamard():
    u = circuit_unitary(Circuit((had(0),), 1, 0, False))
    assert np.allclose(u, oracles.H)


def test_phase_state_zero_is_identity_and_bad_state_rejected():
    term = FermionTerm(TermKind.PQ, (0, 2), 0.4)
    step = compile_terms([term], 3, TrotterPlan(synth=SynthOptions("ancilla")))
    assert np.abs(circuit_unitary(step.circuit, 0) - np.eye(2**4)).max() < 1e-12
    with pytest.raises(ValueError):
        circuit_unitary(step.circuit, 2)


def test_compiled_pq_term_matches_its_exponential():
    term = FermionTerm(TermKind.PQ, (0, 2), 0.4)
    step = compile_terms([term], 3, TrotterPlan(total_time=0.9, synth=SynthOptions("standard")))
    # c+_0 c_2 + h.c. = (XZX + YZY) / 2
    ref = expm(0.9j * 0.4 * 0.5 * (oracles.pauli_string("XZX") + oracles.pauli_string("YZY")))
    assert np.abs(circuit_unitary(step.circuit) - ref).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(circuits(max_system=4, max_gates=30), st.sampled_from([0, 1]))
def test_circuit_unitary_is_unitary(c, ph):
    u = circuit_unitary(c, ph)
    assert np.linalg.norm(u.conj().T @ u - np.eye(len(u))) < 1e-10


def test_resource_guard_and_leak_check():
    with pytest.raises(MemoryError):
        full_unitary(Circuit((), 15, 0, False))
    leaky = Circuit((cnot(0, 1),), 1, 1, False)
    assert circuit_unitary(leaky).shape == (4, 4)
    with pytest.raises(ValueError, match="excited"):
        system_unitary(leaky)


def test_one_orbital_spectra():
    s = exact_spectrum(SpinOrbitalIntegrals(1, np.array([[-0.5]])))
    assert np.allclose(s.energies, [-0.5, 0.0]) and s.ground_energy == -0.5
    assert exact_spectrum(SpinOrbitalIntegrals(1, np.array([[0.5]]))).ground_energy == 0.0
    assert exact_spectrum(SpinOrbitalIntegrals(1, np.zeros((1, 1)))).degenerate


@settings(max_examples=40, deadline=None)
@given(hermitian_integrals(max_n=4))
def test_spectrum_matches_determinant_enumeration(ints):
    ref = oracles.fci_energies(ints.t, ints.v, ints.n_orbitals)
    assert np.allclose(exact_spectrum(ints).energies, ref, atol=1e-12)
    dense = hamiltonian_matrix(ints).toarray()
    assert np.abs(dense - oracles.hamiltonian(ints.t, ints.v, ints.n_orbitals)).max() < 1e-13


def test_h2_like_ground_energy():
    s = exact_spectrum(h2_like_model())
    assert not s.degenerate
    # frozen from the determinant-enumeration oracle
    ints = h2_like_model()
    assert s.ground_energy == pytest.approx(oracles.fci_energies(ints.t, ints.v, 4)[0], abs=1e-12)
    assert s.ground_energy == pytest.approx(-1.851570, abs=1e-6)
    assert s.ground_energy + ints.core_energy == pytest.approx(-1.137870, abs=1e-6)


def test_reference_spectrum_halfup_vector_lives_in_mapped_layout():
    ints = h2_like_model()
    a = reference_spectrum(ints)
    b = reference_spectrum(ints, QubitOrder.HALFUP)
    assert np.allclose(a.energies, b.energies)
    from chemtrotter.synth import qubit_map

    w = oracles.permutation_with_signs(qubit_map(QubitOrder.HALFUP, 2), 4)
    assert abs(abs(np.vdot(w @ a.ground_vector, b.ground_vector)) - 1) < 1e-10


def test_single_term_exact_evolution_has_no_trotter_error():
    term = FermionTerm(TermKind.PQ, (0, 1), -0.6)
    step = compile_terms([term], 2, TrotterPlan(total_time=0.5))
    h = oracles.fermion_term_matrix(term, 2)
    w, v = np.linalg.eigh(h)
    res = trotter_ground_energy(step.circuit, 0.5, v[:, 0], w[0])
    assert res.error < 1e-10 and res.overlap > 0.99 and not res.ambiguous


def test_ambiguous_match_is_flagged():
    u = np.diag(np.exp(1j * np.array([-1.0, 1.0])))
    res = trotter_ground_energy(u, 1.0, np.array([1.0, 1.0]), -1.0)
    assert res.ambiguous and res.overlap == pytest.approx(0.5)


def test_first_order_fermion_error_scales_as_inverse_square():
    ints = h2_like_model()
    t = np.array(ints.t)
    t[0, 2] = t[2, 0] = 0.15
    t[1, 3] = t[3, 1] = 0.15
    ints = SpinOrbitalIntegrals(4, t, ints.v)
    exact = exact_spectrum(ints)
    assert not exact.degenerate
    points = []
    for n in (2, 4, 8, 16):
        plan = TrotterPlan(order_strategy="lex", n_steps=n)
        step = compile_terms(classify_terms(ints), 4, plan)
        res = trotter_ground_energy(step.circuit, plan.delta_t, exact.ground_vector, exact.ground_energy)
        points.append((n, res.error))
    slope, _ = error_scaling_fit(points)
    assert abs(slope + 2) < 0.3


def test_delta_examples():
    x, z = PauliString("X", 1.0), PauliString("Z", 1.0)
    assert np.allclose(delta_operator([x, PauliString("X", 2.0)], delta_t=0.3), 0)
    d = delta_operator([x, z], delta_t=0.3)
    assert np.allclose(d, 0.3 * oracles.Y)
    assert np.allclose(delta_operator([x, z], "execution", 0.3), -0.3 * oracles.Y)
    # X, Z, -X, -Z: 2 [X, Z] = -4i Y survives
    assert np.allclose(delta_operator(list(COUNTEREXAMPLE_TERMS), delta_t=0.1), 0.2 * oracles.Y)
    assert np.allclose(delta_operator(list(COUNTEREXAMPLE_TERMS), "execution", 0.1), -0.2 * oracles.Y)
    with pytest.raises(ValueError):
        delta_operator([x], order="sideways")


@settings(max_examples=30, deadline=None)
@given(st.lists(st.text("XYZ", min_size=2, max_size=2), min_size=2, max_size=5), st.floats(1e-4, 1e-3))
def test_delta_matches_second_order_expansion(letters, dt):
    paulis = [PauliString(s, 0.3 + 0.1 * k) for k, s in enumerate(letters)]
    mats = [oracles.pauli_string(p.letters) * p.coefficient for p in paulis]
    # exp(iA dt) exp(iB dt) = exp(i (A + B) dt + i dt Delta + O(dt^3)), product order
    prod = np.eye(4, dtype=complex)
    for m in mats:
        prod = prod @ expm(1j * dt * m)
    h_eff = logm(prod) / (1j * dt)
    d = delta_operator(paulis, delta_t=dt)
    assert np.abs(h_eff - sum(mats) - d).max() < 1e-4


def test_delta_expectation_vanishes_on_real_ground_state():
    ints = h2_like_model()
    terms = classify_terms(ints)
    s = exact_spectrum(ints)
    d = delta_operator(terms, delta_t=0.1, n_qubits=4)
    assert np.allclose(d, d.conj().T)
    assert abs(s.ground_vector.conj() @ d @ s.ground_vector) < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.lists(canonical_terms(n_max=5), min_size=1, max_size=6), st.integers(0, 2**31))
def test_delta_expectation_matches_dense_operator(cases, seed):
    n = max(n for _, n in cases)
    terms = [t for t, _ in cases]
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    dense = np.vdot(psi, delta_operator(terms, delta_t=0.2, n_qubits=n) @ psi)
    assert abs(delta_expectation(terms, psi, 0.2, n) - dense) < 1e-10 * max(1.0, abs(dense))


def test_fit_examples():
    ns = [2, 4, 8, 16]
    assert error_scaling_fit([(n, 3.0 / n**2) for n in ns])[0] == pytest.approx(-2.0)
    assert error_scaling_fit([(n, 0.5 / n) for n in ns])[0] == pytest.approx(-1.0)
    rng = np.random.default_rng(3)
    noisy = [(n, n**-2.0 * math.exp(rng.normal(0, 0.05))) for n in (2, 4, 8, 16, 32, 64)]
    assert abs(error_scaling_fit(noisy)[0] + 2) < 0.1
    with pytest.warns(RuntimeWarning):
        slope, _ = error_scaling_fit([(n, 1.0 / n) for n in ns] + [(32, 0.0)])
    assert slope == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        error_scaling_fit([(2, 0.1), (4, 0.05)])


def test_counterexample_slope():
    assert abs(counterexample_experiment() + 1) < 0.2
    # the exact Hamiltonian is zero and the error is 2 dt
    for n, err in pauli_step_errors(COUNTEREXAMPLE_TERMS, [4, 16]):
        assert err == pytest.approx(2.0 / n, rel=0.05)


def test_real_noncommuting_pair_gives_inverse_square():
    paulis = [PauliString("X", 1.0), PauliString("Z", 0.7)]
    slope = counterexample_experiment(paulis=paulis)
    assert abs(slope + 2) < 0.3


def test_pauli_circuit_matches_product():
    paulis = [PauliString("XZ", 0.4), PauliString("YY", -0.3), PauliString("IZ", 0.2)]
    u = system_unitary(synth_pauli_terms(paulis, 0.6))
    ref = oracles.ordered_product([p.coefficient * oracles.pauli_string(p.letters) for p in paulis], 0.6)
    assert np.abs(u - ref).max() < 1e-12


def test_sweep_rows_and_csv():
    ints = h2_like_model()
    rows = sweep(ints, [2, 4, 8], orderings=("lex", "interleaved"), fixes=(False, True), workers=2)
    assert [(r.ordering, r.fix, r.n) for r in rows] == [
        (o, f, n) for o in ("lex", "interleaved") for f in (False, True) for n in (2, 4, 8)
    ]
    assert all(np.isfinite(r.error_hartree) and r.error_hartree >= 0 for r in rows)
    serial = sweep(ints, [2, 4, 8], orderings=("lex", "interleaved"), fixes=(False, True), workers=1)
    assert rows == serial
    text = sweep_csv(rows)
    parsed = list(csv.reader(io.StringIO(text)))
    assert parsed[0] == ["n", "ordering", "fix", "style", "error_hartree"]
    assert parsed[1][:4] == ["2", "lex", "off", "ancilla"]
    assert len(parsed) == 13


def test_sweep_fix_converges_to_unfixed():
    ints = h2_like_model()
    t = np.array(ints.t)
    t[0, 2] = t[2, 0] = 0.1
    ints = SpinOrbitalIntegrals(4, t, ints.v, ints.occupation)
    rows = sweep(ints, [1000], orderings=(OrderStrategy.LEXICOGRAPHIC,), fixes=(False, True))
    assert abs(rows[0].error_hartree - rows[1].error_hartree) < 1e-6
