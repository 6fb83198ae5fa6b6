"""Reference numpy implementations of the hot loops (used when the extension is absent)."""
from __future__ import annotations

import numpy as np

CNOT, HAD, YBASIS, YBASIS_DAG, CZ, CRZ, PHASE = range(7)
_S = 1 / np.sqrt(2)


def _at(n, *pairs):
    idx = [slice(None)] * (n + 1)
    for q, bit in pairs:
        idx[q] = bit
    return tuple(idx)


def apply_gates(state, codes, qa, qb, angles, n):
    """Apply gates in order to the rows of ``state`` (shape ``(2**n, m)``), in place.

    Qubit 0 is the most significant bit of the row index.  A negative control on
    ``CRZ`` means uncontrolled; a negative qubit on ``PHASE`` means a scalar.
    """
    v = state.reshape((2,) * n + (state.shape[1],))
    for code, a, b, theta in zip(codes, qa, qb, angles):
        if code == CNOT:
            lo, hi = _at(n, (a, 1), (b, 0)), _at(n, (a, 1), (b, 1))
            tmp = v[lo].copy()
            v[lo] = v[hi]
            v[hi] = tmp
        elif code in (HAD, YBASIS, YBASIS_DAG):
            i0, i1 = _at(n, (a, 0)), _at(n, (a, 1))
            x, y = v[i0].copy(), v[i1].copy()
            if code == HAD:
                v[i0], v[i1] = (x + y) * _S, (x - y) * _S
            elif code == YBASIS:
                v[i0], v[i1] = (x + 1j * y) * _S, (1j * x + y) * _S
            else:
                v[i0], v[i1] = (x - 1j * y) * _S, (y - 1j * x) * _S
        elif code == CZ:
            v[_at(n, (a, 1), (b, 1))] *= -1
        elif code == CRZ:
            ctrl = ((a, 1),) if a >= 0 else ()
            v[_at(n, *ctrl, (b, 0))] *= np.exp(-0.5j * theta)
            v[_at(n, *ctrl, (b, 1))] *= np.exp(0.5j * theta)
        elif code == PHASE:
            if a >= 0:
                v[_at(n, (a, 1))] *= np.exp(1j * theta)
            else:
                state *= np.exp(1j * theta)
        else:
            raise ValueError(f"unknown gate code {code}")
    return state


def asap_layers(qa, qb, n_qubits):
    last = [0] * n_qubits
    out = np.empty(len(qa), dtype=np.int64)
    for i, (a, b) in enumerate(zip(qa.tolist(), qb.tolist())):
        layer = 0
        if a >= 0 and last[a] > layer:
            layer = last[a]
        if b >= 0 and last[b] > layer:
            layer = last[b]
        layer += 1
        if a >= 0:
            last[a] = layer
        if b >= 0:
            last[b] = layer
        out[i] = layer
    return out
