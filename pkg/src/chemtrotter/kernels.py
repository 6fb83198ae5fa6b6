"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``CHEMTROTTER_PURE_PYTHON=1`` to force the numpy path.
"""
from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("CHEMTROTTER_PURE_PYTHON"):
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def apply_gates(state, codes, qa, qb, angles, n, impl=None):
    impl = impl or _impl
    return impl.apply_gates(
        state,
        np.ascontiguousarray(codes, dtype=np.int64),
        np.ascontiguousarray(qa, dtype=np.int64),
        np.ascontiguousarray(qb, dtype=np.int64),
        np.ascontiguousarray(angles, dtype=np.float64),
        int(n),
    )


def asap_layers(qa, qb, n_qubits, impl=None):
    impl = impl or _impl
    return impl.asap_layers(
        np.ascontiguousarray(qa, dtype=np.int64), np.ascontiguousarray(qb, dtype=np.int64), int(n_qubits)
    )
