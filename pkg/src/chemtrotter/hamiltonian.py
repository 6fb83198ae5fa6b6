"""Second-quantized Hamiltonians: integrals, term classification, corrections.

The Hamiltonian is

    H = sum_pq t_pq c+_p c_q + 1/2 sum_pqrs V_pqrs c+_p c+_q c_r c_s

over ``N`` spin orbitals, 0-based.  Terms are grouped into five classes
(``PP``, ``PQ``, ``PQQP``, ``PQQR``, ``PQRS``).  A :class:`FermionTerm` with
coefficient ``c`` always denotes a Hermitian operator:

=========  ==========  ==============================================
kind       indices     operator
=========  ==========  ==============================================
PP         (p,)        c n_p
PQ         (p, q)      c (c+_p c_q + c+_q c_p),                p < q
PQQP       (p, q)      c n_p n_q,                              p < q
PQQR       (p, q, r)   c (c+_p n_q c_r + c+_r n_q c_p),        p < r
PQRS       (p,q,r,s)   c (c+_p c+_q c_r c_s + h.c.),  p<q, r<s, (p,q)<(r,s)
=========  ==========  ==============================================
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

DEFAULT_THRESHOLD = 1e-12
HERMITICITY_TOL = 1e-10


class TermKind(enum.IntEnum):
    PP = 0
    PQ = 1
    PQQP = 2
    PQQR = 3
    PQRS = 4

    @property
    def diagonal(self) -> bool:
        return self in (TermKind.PP, TermKind.PQQP)


_N_INDICES = {TermKind.PP: 1, TermKind.PQ: 2, TermKind.PQQP: 2, TermKind.PQQR: 3, TermKind.PQRS: 4}


@dataclass(frozen=True, eq=False)
class SpinOrbitalIntegrals:
    """One- and two-body integrals over ``n_orbitals`` spin orbitals (Hartree).

    ``v`` maps ``(p, q, r, s)`` to ``V_pqrs`` exactly as stored; nothing is
    symmetry-completed.  ``core_energy`` is a scalar offset kept for file round
    trips; it never enters the compiled terms.
    """

    n_orbitals: int
    t: np.ndarray
    v: Mapping[tuple[int, int, int, int], float] = field(default_factory=dict)
    occupation: tuple[int, ...] | None = None
    core_energy: float = 0.0

    def __post_init__(self):
        n = int(self.n_orbitals)
        if n <= 0:
            raise ValueError(f"n_orbitals must be positive, got {n}")
        t = np.array(self.t, dtype=float)
        if t.shape != (n, n):
            raise ValueError(f"t has shape {t.shape}, expected ({n}, {n})")
        if not np.allclose(t, t.T, atol=HERMITICITY_TOL, rtol=0):
            bad = np.unravel_index(np.argmax(np.abs(t - t.T)), t.shape)
            raise ValueError(f"t is not symmetric at entry {tuple(int(i) for i in bad)}")
        t.setflags(write=False)
        v = {}
        for key, value in self.v.items():
            idx = tuple(int(i) for i in key)
            if len(idx) != 4:
                raise ValueError(f"two-body entry {key} must have four indices")
            if any(i < 0 or i >= n for i in idx):
                raise ValueError(f"two-body entry {idx} has an index outside [0, {n})")
            v[idx] = v.get(idx, 0.0) + float(value)
        occ = self.occupation
        if occ is not None:
            occ = tuple(int(x) for x in occ)
            if len(occ) != n or any(x not in (0, 1) for x in occ):
                raise ValueError(f"occupation must be a length-{n} sequence of 0/1, got {occ}")
        object.__setattr__(self, "n_orbitals", n)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "occupation", occ)
        object.__setattr__(self, "core_energy", float(self.core_energy))

    def __eq__(self, other):
        if not isinstance(other, SpinOrbitalIntegrals):
            return NotImplemented
        return (
            self.n_orbitals == other.n_orbitals
            and np.array_equal(self.t, other.t)
            and self.v == other.v
            and self.occupation == other.occupation
            and self.core_energy == other.core_energy
        )

    @classmethod
    def zeros(cls, n_orbitals: int, **kwargs) -> "SpinOrbitalIntegrals":
        return cls(n_orbitals, np.zeros((n_orbitals, n_orbitals)), {}, **kwargs)


@dataclass(frozen=True)
class FermionTerm:
    kind: TermKind
    indices: tuple[int, ...]
    coefficient: float

    def __post_init__(self):
        kind = TermKind(self.kind)
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coefficient", float(self.coefficient))
        if len(idx) != _N_INDICES[kind]:
            raise ValueError(f"{kind.name} term needs {_N_INDICES[kind]} indices, got {idx}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"{kind.name} term indices must be distinct, got {idx}")
        if kind is TermKind.PQRS:
            ok = idx[0] < idx[1] and idx[2] < idx[3] and idx[:2] < idx[2:]
        else:
            ok = idx[0] <= idx[-1]
        if not ok:
            raise ValueError(f"{kind.name}{idx} is not in canonical index order")

    @property
    def key(self) -> tuple[TermKind, tuple[int, ...]]:
        return (self.kind, self.indices)

    def with_coefficient(self, coefficient: float) -> "FermionTerm":
        return FermionTerm(self.kind, self.indices, coefficient)

    def monomial(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Creation and annihilation indices of the normal-ordered product ``X``."""
        i = self.indices
        if self.kind is TermKind.PP:
            return (i[0],), (i[0],)
        if self.kind is TermKind.PQ:
            return (i[0],), (i[1],)
        if self.kind is TermKind.PQQP:
            return (i[0], i[1]), (i[1], i[0])
        if self.kind is TermKind.PQQR:
            return (i[0], i[1]), (i[1], i[2])
        return (i[0], i[1]), (i[2], i[3])

    def relabel(self, perm: Sequence[int]) -> "FermionTerm":
        """The same fermionic operator with mode ``j`` renamed to ``perm[j]``."""
        cre, ann = self.monomial()
        kind, idx, sign, _ = canonical_monomial(
            tuple(perm[i] for i in cre), tuple(perm[i] for i in ann)
        )
        return FermionTerm(kind, idx, sign * self.coefficient)

    def __repr__(self):
        return f"{self.kind.name}{self.indices}[{self.coefficient:+.6g}]"


def canonical_monomial(creators: tuple[int, ...], annihilators: tuple[int, ...]):
    """Map a normal-ordered monomial onto its canonical term.

    Returns ``(kind, indices, sign, part)`` where ``part`` is ``"diag"``, ``"x"``
    (the monomial is ``sign * X``) or ``"xdag"`` (it is ``sign * X^dagger``).
    Returns ``None`` for monomials that vanish identically.
    """
    if len(creators) == 1:
        (a,), (b,) = creators, annihilators
        if a == b:
            return TermKind.PP, (a,), 1, "diag"
        if a < b:
            return TermKind.PQ, (a, b), 1, "x"
        return TermKind.PQ, (b, a), 1, "xdag"

    a, b = creators
    c, d = annihilators
    if a == b or c == d:
        return None
    if {a, b} == {c, d}:
        sign = 1 if (c, d) == (b, a) else -1
        return TermKind.PQQP, (min(a, b), max(a, b)), sign, "diag"
    shared = {a, b} & {c, d}
    if shared:
        (m,) = shared
        x = b if a == m else a
        y = d if c == m else c
        sign = (1 if a == x else -1) * (1 if d == y else -1)
        if x < y:
            return TermKind.PQQR, (x, m, y), sign, "x"
        return TermKind.PQQR, (y, m, x), sign, "xdag"
    sign = (1 if a < b else -1) * (1 if c < d else -1)
    left, right = (min(a, b), max(a, b)), (min(c, d), max(c, d))
    if left < right:
        return TermKind.PQRS, left + right, sign, "x"
    return TermKind.PQRS, right + left, sign, "xdag"


def classify_terms(
    integrals: SpinOrbitalIntegrals, threshold: float = DEFAULT_THRESHOLD
) -> list[FermionTerm]:
    """Split the integrals into canonical Hermitian terms.

    Entries that describe the same operator (index permutations, conjugate
    partners) are merged with their fermionic signs.  Terms whose merged
    coefficient is at most ``threshold`` in magnitude are dropped.  Raises
    ``ValueError`` when a term and its conjugate carry different weights.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    n = integrals.n_orbitals
    acc: dict[tuple, list[float]] = {}

    def add(creators, annihilators, value, source):
        for i in creators + annihilators:
            if not 0 <= i < n:
                raise ValueError(f"entry {source} has index {i} outside [0, {n})")
        hit = canonical_monomial(creators, annihilators)
        if hit is None:
            return
        kind, idx, sign, part = hit
        slot = acc.setdefault((kind, idx), [0.0, 0.0])
        slot[1 if part == "xdag" else 0] += sign * value

    t = integrals.t
    for p in range(n):
        for q in range(n):
            if t[p, q] != 0.0:
                add((p,), (q,), float(t[p, q]), ("t", p, q))
    for (p, q, r, s), value in integrals.v.items():
        if value != 0.0:
            add((p, q), (r, s), 0.5 * value, ("v", p, q, r, s))

    terms = []
    for (kind, idx), (x, xdag) in sorted(acc.items(), key=lambda kv: kv[0]):
        if kind.diagonal:
            coefficient = x
        else:
            if abs(x - xdag) > HERMITICITY_TOL * (1.0 + max(abs(x), abs(xdag))):
                raise ValueError(
                    f"{kind.name}{idx} is not Hermitian: weight {x!r} on the term "
                    f"but {xdag!r} on its conjugate"
                )
            coefficient = 0.5 * (x + xdag)
        if abs(coefficient) > threshold:
            terms.append(FermionTerm(kind, idx, coefficient))
    return terms


def terms_to_integrals(terms: Iterable[FermionTerm], n_orbitals: int) -> SpinOrbitalIntegrals:
    """Rebuild a (Hermitian) integral set whose classification is ``terms``."""
    t = np.zeros((n_orbitals, n_orbitals))
    v: dict[tuple[int, int, int, int], float] = {}

    def put(key, value):
        v[key] = v.get(key, 0.0) + value

    for term in terms:
        c, i = term.coefficient, term.indices
        if term.kind is TermKind.PP:
            t[i[0], i[0]] += c
        elif term.kind is TermKind.PQ:
            t[i[0], i[1]] += c
            t[i[1], i[0]] += c
        elif term.kind is TermKind.PQQP:
            put((i[0], i[1], i[1], i[0]), 2 * c)
        elif term.kind is TermKind.PQQR:
            p, q, r = i
            put((p, q, q, r), 2 * c)
            put((r, q, q, p), 2 * c)
        else:
            p, q, r, s = i
            put((p, q, r, s), 2 * c)
            put((s, r, q, p), 2 * c)
    return SpinOrbitalIntegrals(n_orbitals, t, v)


def hf_sum_rule_residual(integrals: SpinOrbitalIntegrals, kappa: float = 0.5) -> np.ndarray:
    """``R[p, q] = t_pq + kappa * sum_r V_prrq n_r`` off the diagonal, zero on it.

    ``kappa=0.5`` matches the 1/2 in the Hamiltonian; ``kappa=1`` is the other
    normalization in circulation.  See :func:`hf_sum_rule_report` for both.
    """
    if integrals.occupation is None:
        raise ValueError("Hartree-Fock sum rule needs an occupation vector")
    n = integrals.n_orbitals
    occ = integrals.occupation
    r = np.array(integrals.t, dtype=float)
    for (p, a, b, q), value in integrals.v.items():
        if a == b and occ[a]:
            r[p, q] += kappa * value
    np.fill_diagonal(r, 0.0)
    return r


def hf_sum_rule_report(integrals: SpinOrbitalIntegrals) -> dict[float, np.ndarray]:
    return {k: hf_sum_rule_residual(integrals, k) for k in (0.5, 1.0)}


@dataclass(frozen=True)
class EffectiveFrequencies:
    omega: tuple[float, ...]

    def __len__(self):
        return len(self.omega)

    def __getitem__(self, p):
        return self.omega[p]


def effective_frequencies(integrals: SpinOrbitalIntegrals) -> EffectiveFrequencies:
    """``omega_p = t_pp + 1/2 sum_q V_pqqp``."""
    omega = [float(integrals.t[p, p]) for p in range(integrals.n_orbitals)]
    for (p, q, r, s), value in integrals.v.items():
        if q == r and p == s:
            omega[p] += 0.5 * value
    return EffectiveFrequencies(tuple(omega))


_SERIES_CUTOFF = 1e-4


def f_correction(x: float) -> float:
    """Off-diagonal scaling ``sqrt(2 (1 - cos x) / (x sin x))``, with f(0) = 1.

    Evaluated as ``sqrt(tan(x/2) / (x/2))``, which is the same function without
    the cancellation.  Even in ``x``, increasing on (0, pi), singular at pi.
    """
    x = float(x)
    if not abs(x) < math.pi:
        raise ValueError(f"f_correction is only defined for |x| < pi, got x={x!r}")
    if abs(x) < _SERIES_CUTOFF:
        x2 = x * x
        return 1.0 + x2 / 24.0 + 19.0 * x2 * x2 / 5760.0
    u = 0.5 * abs(x)
    return math.sqrt(math.tan(u) / u)


def apply_diagonal_fix(integrals: SpinOrbitalIntegrals, delta_t: float) -> SpinOrbitalIntegrals:
    """Scale every entry by ``f(delta_t * (frequency difference))``.

    One-body entries use ``omega_p - omega_q`` and two-body entries
    ``omega_p + omega_q - omega_r - omega_s``; both vanish on the diagonal
    classes, so ``PP`` and ``PQQP`` weights are unchanged.
    """
    if not delta_t > 0:
        raise ValueError(f"delta_t must be positive, got {delta_t!r}")
    omega = effective_frequencies(integrals).omega
    n = integrals.n_orbitals

    def scale(arg, what):
        try:
            return f_correction(delta_t * arg)
        except ValueError as exc:
            raise ValueError(f"diagonal fix for {what}: {exc}; use a smaller delta_t") from None

    t = np.array(integrals.t, dtype=float)
    for p in range(n):
        for q in range(p + 1, n):
            if t[p, q] != 0.0:
                factor = scale(omega[p] - omega[q], f"t{(p, q)}")
                t[p, q] *= factor
                t[q, p] *= factor
    v = {
        (p, q, r, s): value * scale(omega[p] + omega[q] - omega[r] - omega[s], f"V{(p, q, r, s)}")
        for (p, q, r, s), value in integrals.v.items()
    }
    return SpinOrbitalIntegrals(n, t, v, integrals.occupation, integrals.core_energy)
