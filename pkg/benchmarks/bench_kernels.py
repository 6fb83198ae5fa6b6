"""Compiled vs pure-Python kernels on real compiled steps.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from chemtrotter import _pykernels, kernels
from chemtrotter.circuit import _wires
from chemtrotter.fixtures import dense_pqrs_terms, h2_like_model
from chemtrotter.simulator import _encode, _project_phase
from chemtrotter.trotter import OrderStrategy, TrotterPlan, compile_step, compile_terms, order_terms


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    yield "h2_like step", compile_step(h2_like_model(), TrotterPlan()).circuit
    for n in (6, 8):
        terms = order_terms(dense_pqrs_terms(n), OrderStrategy.INTERLEAVED)
        yield f"dense N={n} step", compile_terms(terms, n, TrotterPlan(nest=True, cancel=True)).circuit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled extension not built; only the Python kernels are available")
    impls = {"python": _pykernels}
    if kernels.BACKEND == "cython":
        from chemtrotter import _kernels

        impls["cython"] = _kernels
    print(f"{'case':<18}{'gates':>8}{'kernel':>10}" + "".join(f"{k:>12}" for k in impls) + (f"{'speedup':>10}" if len(impls) == 2 else ""))
    for name, c in cases():
        n = c.n_system + c.n_parity
        enc = _encode(_project_phase(c, 1))
        dim = 2**n
        # a block of basis columns keeps the numpy path's memory modest
        cols = min(dim, 16)
        state0 = np.zeros((dim, cols), dtype=complex)
        state0[np.arange(cols), np.arange(cols)] = 1.0
        sim = {}
        for k, impl in impls.items():
            sim[k], out = best_of(lambda: kernels.apply_gates(state0.copy(), *enc, n, impl=impl), args.repeat)
            sim.setdefault("out_" + k, out)
        if len(impls) == 2:
            assert np.abs(sim["out_python"] - sim["out_cython"]).max() < 1e-12
        qa, qb = _wires(c, True)
        lay = {k: best_of(lambda: kernels.asap_layers(qa, qb, c.n_qubits, impl=impl), args.repeat)[0] for k, impl in impls.items()}
        for label, t in (("apply", sim), ("layers", lay)):
            row = f"{name:<18}{len(c):>8}{label:>10}" + "".join(f"{t[k] * 1e3:>10.2f}ms" for k in impls)
            if len(impls) == 2:
                row += f"{t['python'] / t['cython']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()
