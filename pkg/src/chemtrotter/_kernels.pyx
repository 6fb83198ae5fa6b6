# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the numpy kernels in ``_pykernels``; same signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cdef enum:
    CNOT = 0
    HAD = 1
    YBASIS = 2
    YBASIS_DAG = 3
    CZ = 4
    CRZ = 5
    PHASE = 6


def apply_gates(double complex[:, ::1] state, const long[::1] codes, const long[::1] qa,
                const long[::1] qb, const double[::1] angles, int n):
    cdef Py_ssize_t rows = state.shape[0], m = state.shape[1]
    cdef Py_ssize_t g, i, j, k
    cdef long code, a, b
    cdef long ma, mb
    cdef double s = 1.0 / sqrt(2.0)
    cdef double complex x, y, e0, e1, I = 1j
    for g in range(codes.shape[0]):
        code = codes[g]
        a = qa[g]
        b = qb[g]
        ma = (1 << (n - 1 - a)) if a >= 0 else 0
        mb = (1 << (n - 1 - b)) if b >= 0 else 0
        if code == CNOT:
            for i in range(rows):
                if (i & ma) and not (i & mb):
                    k = i | mb
                    for j in range(m):
                        x = state[i, j]
                        state[i, j] = state[k, j]
                        state[k, j] = x
        elif code == HAD or code == YBASIS or code == YBASIS_DAG:
            for i in range(rows):
                if not (i & ma):
                    k = i | ma
                    for j in range(m):
                        x = state[i, j]
                        y = state[k, j]
                        if code == HAD:
                            state[i, j] = (x + y) * s
                            state[k, j] = (x - y) * s
                        elif code == YBASIS:
                            state[i, j] = (x + I * y) * s
                            state[k, j] = (I * x + y) * s
                        else:
                            state[i, j] = (x - I * y) * s
                            state[k, j] = (y - I * x) * s
        elif code == CZ:
            for i in range(rows):
                if (i & ma) and (i & mb):
                    for j in range(m):
                        state[i, j] = -state[i, j]
        elif code == CRZ:
            e0 = cos(0.5 * angles[g]) - I * sin(0.5 * angles[g])
            e1 = cos(0.5 * angles[g]) + I * sin(0.5 * angles[g])
            for i in range(rows):
                if a >= 0 and not (i & ma):
                    continue
                x = e1 if (i & mb) else e0
                for j in range(m):
                    state[i, j] = state[i, j] * x
        elif code == PHASE:
            e1 = cos(angles[g]) + I * sin(angles[g])
            for i in range(rows):
                if a >= 0 and not (i & ma):
                    continue
                for j in range(m):
                    state[i, j] = state[i, j] * e1
        else:
            raise ValueError(f"unknown gate code {code}")
    return np.asarray(state)


def asap_layers(const long[::1] qa, const long[::1] qb, int n_qubits):
    cdef Py_ssize_t i, n = qa.shape[0]
    cdef long a, b, layer
    cdef cnp.ndarray[long, ndim=1] last = np.zeros(n_qubits, dtype=np.int64)
    cdef cnp.ndarray[long, ndim=1] out = np.empty(n, dtype=np.int64)
    for i in range(n):
        a = qa[i]
        b = qb[i]
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
