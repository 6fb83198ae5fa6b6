"""Bundled model Hamiltonians (generated deterministically; data/ holds serialized copies)."""
from __future__ import annotations

import itertools
from importlib import resources

import numpy as np

from .hamiltonian import FermionTerm, SpinOrbitalIntegrals, TermKind, terms_to_integrals

DENSE_SIZES = (6, 8, 10, 12)

# two spatial orbitals, chemist notation (ij|kl); values close to minimal-basis H2
_H2_ONE = np.array([[-1.2528, 0.0], [0.0, -0.4756]])
_H2_TWO = {
    (0, 0, 0, 0): 0.6746,
    (1, 1, 1, 1): 0.6975,
    (0, 0, 1, 1): 0.6636,
    (0, 1, 0, 1): 0.1813,
}
_H2_CORE = 0.7137


def _chemist(two: dict, i, j, k, l) -> float:
    for key in ((i, j, k, l), (j, i, l, k), (k, l, i, j), (l, k, j, i), (j, i, k, l), (i, j, l, k), (l, k, i, j), (k, l, j, i)):
        if key in two:
            return two[key]
    return 0.0


def spatial_to_spin(one: np.ndarray, two: dict, core: float = 0.0, occupation=None) -> SpinOrbitalIntegrals:
    """Spin-orbital integrals from real spatial ones; spin orbital ``2 i + spin``.

    ``V_pqrs = (p s | q r)`` when the spins of ``p, s`` and of ``q, r`` agree.
    """
    n_spatial = one.shape[0]
    n = 2 * n_spatial
    t = np.zeros((n, n))
    for p, q in itertools.product(range(n), repeat=2):
        if p % 2 == q % 2:
            t[p, q] = one[p // 2, q // 2]
    v = {}
    for p, q, r, s in itertools.product(range(n), repeat=4):
        if p % 2 != s % 2 or q % 2 != r % 2 or p == q or r == s:
            continue
        value = _chemist(two, p // 2, s // 2, q // 2, r // 2)
        if value != 0.0:
            v[(p, q, r, s)] = value
    return SpinOrbitalIntegrals(n, t, v, occupation, core)


def h2_like_model() -> SpinOrbitalIntegrals:
    """Four spin orbitals, two electrons, Hartree-Fock occupation ``[1, 1, 0, 0]``."""
    return spatial_to_spin(_H2_ONE, _H2_TWO, _H2_CORE, (1, 1, 0, 0))


def dense_pqrs_terms(n: int, seed: int | None = None) -> list[FermionTerm]:
    """Every PQRS term on ``n`` spin orbitals with a random nonzero weight."""
    rng = np.random.default_rng(1000 + n if seed is None else seed)
    terms = []
    pairs = list(itertools.combinations(range(n), 2))
    for a, (p, q) in enumerate(pairs):
        for r, s in pairs[a + 1:]:
            if len({p, q, r, s}) == 4:
                w = rng.uniform(0.05, 0.5) * rng.choice((-1.0, 1.0))
                terms.append(FermionTerm(TermKind.PQRS, (p, q, r, s), float(w)))
    return terms


def dense_pqrs_integrals(n: int, seed: int | None = None) -> SpinOrbitalIntegrals:
    return terms_to_integrals(dense_pqrs_terms(n, seed), n)


def data_path(name: str):
    return resources.files("chemtrotter") / "data" / name


def load(name: str) -> SpinOrbitalIntegrals:
    """A bundled integral file, e.g. ``"h2_like.int"`` or ``"dense_pqrs_8.int"``."""
    from .io import parse_integrals

    return parse_integrals(data_path(name).read_text())
