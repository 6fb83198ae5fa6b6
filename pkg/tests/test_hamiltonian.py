import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from chemtrotter.fixtures import h2_like_model
from chemtrotter.hamiltonian import (
    FermionTerm,
    SpinOrbitalIntegrals,
    TermKind,
    apply_diagonal_fix,
    canonical_monomial,
    classify_terms,
    effective_frequencies,
    f_correction,
    hf_sum_rule_report,
    hf_sum_rule_residual,
    terms_to_integrals,
)


def total_matrix(terms, n):
    out = np.zeros((2**n, 2**n))
    for t in terms:
        out = out + oracles.fermion_term_matrix(t, n)
    return out


@st.composite
def hermitian_integrals(draw, max_n=4):
    n = draw(st.integers(1, max_n))
    vals = st.floats(-1, 1, allow_nan=False).filter(lambda x: abs(x) > 1e-3)
    t = np.zeros((n, n))
    for p in range(n):
        for q in range(p, n):
            if draw(st.booleans()):
                t[p, q] = t[q, p] = draw(vals)
    v = {}
    quads = list(itertools.product(range(n), repeat=4))
    for idx in draw(st.lists(st.sampled_from(quads), max_size=8)):
        x = draw(vals)
        p, q, r, s = idx
        v[idx] = v.get(idx, 0.0) + x
        v[(s, r, q, p)] = v.get((s, r, q, p), 0.0) + x
    return SpinOrbitalIntegrals(n, t, v)


@settings(max_examples=60, deadline=None)
@given(hermitian_integrals())
def test_classified_terms_reproduce_the_hamiltonian(integrals):
    n = integrals.n_orbitals
    terms = classify_terms(integrals)
    ref = oracles.hamiltonian(integrals.t, integrals.v, n)
    assert np.abs(total_matrix(terms, n) - ref).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(hermitian_integrals())
def test_classification_is_canonical_and_sorted(integrals):
    terms = classify_terms(integrals)
    assert [t.key for t in terms] == sorted(t.key for t in terms)
    assert len({t.key for t in terms}) == len(terms)
    for t in terms:
        assert abs(t.coefficient) > 1e-12


@settings(max_examples=60, deadline=None)
@given(hermitian_integrals())
def test_terms_to_integrals_round_trip(integrals):
    terms = classify_terms(integrals)
    back = classify_terms(terms_to_integrals(terms, integrals.n_orbitals))
    assert [t.key for t in back] == [t.key for t in terms]
    assert np.allclose([t.coefficient for t in back], [t.coefficient for t in terms], atol=1e-14)


def test_h2_like_classification():
    terms = classify_terms(h2_like_model())
    kinds = {k: sum(1 for t in terms if t.kind is k) for k in TermKind}
    # 4 number terms, 6 pair densities, 2 spin-exchange double excitations
    # ((0,1)->(2,3) and (0,3)->(1,2)), nothing else survives the spin structure
    assert kinds == {TermKind.PP: 4, TermKind.PQ: 0, TermKind.PQQP: 6, TermKind.PQQR: 0, TermKind.PQRS: 2}


def test_single_entries_classify_as_documented():
    ints = SpinOrbitalIntegrals(3, np.zeros((3, 3)), {(0, 1, 1, 0): 0.8, (1, 0, 0, 1): 0.8})
    assert classify_terms(ints) == [FermionTerm(TermKind.PQQP, (0, 1), 0.8)]
    t = np.zeros((3, 3))
    t[0, 2] = t[2, 0] = 0.25
    assert classify_terms(SpinOrbitalIntegrals(3, t)) == [FermionTerm(TermKind.PQ, (0, 2), 0.25)]


def test_non_hermitian_two_body_raises():
    ints = SpinOrbitalIntegrals(4, np.zeros((4, 4)), {(0, 1, 2, 3): 1.0})
    with pytest.raises(ValueError, match="not Hermitian"):
        classify_terms(ints)


def test_threshold_prunes_small_terms():
    t = np.diag([1e-13, 0.5])
    assert classify_terms(SpinOrbitalIntegrals(2, t)) == [FermionTerm(TermKind.PP, (1,), 0.5)]
    assert len(classify_terms(SpinOrbitalIntegrals(2, t), threshold=0.0)) == 2


def test_canonical_monomial_vanishing_and_signs():
    assert canonical_monomial((1, 1), (0, 2)) is None
    assert canonical_monomial((0, 1), (1, 0)) == (TermKind.PQQP, (0, 1), 1, "diag")
    assert canonical_monomial((0, 1), (0, 1)) == (TermKind.PQQP, (0, 1), -1, "diag")
    assert canonical_monomial((2, 0), (1, 3)) == (TermKind.PQRS, (0, 2, 1, 3), -1, "x")
    # c+_1 c+_3 c_0 c_2 is the conjugate of c+_0 c+_2 c_1 c_3
    assert canonical_monomial((1, 3), (0, 2)) == (TermKind.PQRS, (0, 2, 1, 3), 1, "xdag")


def test_fermion_term_validation():
    with pytest.raises(ValueError):
        FermionTerm(TermKind.PQ, (2, 1), 1.0)
    with pytest.raises(ValueError):
        FermionTerm(TermKind.PQRS, (0, 1, 0, 2), 1.0)
    with pytest.raises(ValueError):
        FermionTerm(TermKind.PP, (0, 1), 1.0)
    assert FermionTerm(TermKind.PP, (0,), 1.0) != FermionTerm(TermKind.PP, (0,), 2.0)


@pytest.mark.parametrize(
    "term",
    [
        FermionTerm(TermKind.PQ, (0, 3), 0.4),
        FermionTerm(TermKind.PQQR, (0, 1, 3), -0.3),
        FermionTerm(TermKind.PQQR, (1, 0, 2), 0.7),
        FermionTerm(TermKind.PQRS, (0, 2, 1, 3), 0.5),
        FermionTerm(TermKind.PQQP, (1, 2), 0.2),
    ],
)
def test_relabel_is_conjugation_by_mode_permutation(term):
    perm = (0, 2, 1, 3)
    w = oracles.permutation_with_signs(perm, 4)
    lhs = w @ oracles.fermion_term_matrix(term, 4) @ w.T
    assert np.abs(lhs - oracles.fermion_term_matrix(term.relabel(perm), 4)).max() < 1e-14


def test_integral_validation():
    with pytest.raises(ValueError, match="symmetric"):
        SpinOrbitalIntegrals(2, np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="outside"):
        SpinOrbitalIntegrals(2, np.zeros((2, 2)), {(0, 1, 2, 0): 1.0})
    with pytest.raises(ValueError):
        SpinOrbitalIntegrals(2, np.zeros((2, 2)), occupation=(1, 2))


def test_sum_rule_residual_hand_example():
    t = np.zeros((3, 3))
    t[0, 1] = t[1, 0] = 0.2
    ints = SpinOrbitalIntegrals(3, t, {(0, 2, 2, 1): 0.4, (1, 2, 2, 0): 0.4}, occupation=(0, 0, 1))
    r = hf_sum_rule_residual(ints)
    assert r[0, 1] == pytest.approx(0.4)
    assert r[1, 0] == pytest.approx(0.4)
    assert np.all(np.diag(r) == 0)
    both = hf_sum_rule_report(ints)
    assert both[1.0][0, 1] == pytest.approx(0.6)


def test_sum_rule_needs_occupation():
    with pytest.raises(ValueError):
        hf_sum_rule_residual(SpinOrbitalIntegrals.zeros(2))


def test_effective_frequencies_h2():
    omega = effective_frequencies(h2_like_model())
    # t_00 + (V_0110 + V_0220 + V_0330) / 2 with (00|00), (00|11), (00|11)
    assert omega[0] == pytest.approx(-1.2528 + 0.5 * (0.6746 + 0.6636 + 0.6636))
    assert omega[2] == pytest.approx(-0.4756 + 0.5 * (0.6975 + 0.6636 + 0.6636))
    assert len(omega) == 4


def _f_reference(x):
    x = mpmath.mpf(x)
    return float(mpmath.sqrt(2 * (1 - mpmath.cos(x)) / (x * mpmath.sin(x))))


def test_f_correction_values():
    assert f_correction(0.0) == 1.0
    assert f_correction(0.1) == pytest.approx(1.000417, abs=1e-6)
    assert f_correction(math.pi / 2) == pytest.approx(math.sqrt(4 / math.pi), abs=1e-12)
    assert f_correction(-0.3) == f_correction(0.3)


@pytest.mark.parametrize("x", [1e-8, 5e-5, 9.99e-5, 1.0001e-4, 1e-3, 0.5, 2.0, 3.1])
def test_f_correction_matches_high_precision(x):
    with mpmath.workdps(50):
        ref = _f_reference(x)
    assert f_correction(x) == pytest.approx(ref, rel=1e-13)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
def test_f_correction_even_and_increasing(a, b):
    lo, hi = sorted((a, b))
    assert f_correction(lo) <= f_correction(hi) + 1e-15
    assert f_correction(-a) == f_correction(a)


def test_f_correction_domain():
    with pytest.raises(ValueError):
        f_correction(math.pi)
    with pytest.raises(ValueError):
        f_correction(-4.0)


def test_diagonal_fix_scales_off_diagonal_only():
    ints = h2_like_model()
    t = np.array(ints.t)
    t[0, 2] = t[2, 0] = 0.1
    ints = SpinOrbitalIntegrals(4, t, ints.v, ints.occupation, ints.core_energy)
    dt = 0.3
    fixed = apply_diagonal_fix(ints, dt)
    w = effective_frequencies(ints).omega
    assert fixed.t[0, 2] == pytest.approx(0.1 * f_correction(dt * (w[0] - w[2])))
    assert np.array_equal(np.diag(fixed.t), np.diag(ints.t))
    before = {t.key: t.coefficient for t in classify_terms(ints)}
    after = {t.key: t.coefficient for t in classify_terms(fixed)}
    for key, c in before.items():
        if key[0].diagonal:
            assert after[key] == c
    p, q, r, s = 0, 3, 1, 2
    assert fixed.v[(p, q, r, s)] == pytest.approx(ints.v[(p, q, r, s)] * f_correction(dt * (w[p] + w[q] - w[r] - w[s])))


def test_diagonal_fix_domain_error_names_entry():
    t = np.diag([10.0, -10.0])
    t[0, 1] = t[1, 0] = 0.1
    with pytest.raises(ValueError, match=r"t\(0, 1\)"):
        apply_diagonal_fix(SpinOrbitalIntegrals(2, t), 0.2)
