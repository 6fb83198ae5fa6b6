"""Integral files, run reports, sweep CSV and atomic file output.

Integral file format (1-based indices, ``#`` starts a comment)::

    norb 4
    nelec 2            # optional
    occ 1 1 0 0        # optional
    -0.75 0 0 0 0      # core energy
    -1.25 1 1 0 0      # t_11 (t_ij given once per pair, mirrored)
    0.35 1 2 2 1       # V_1221, stored as given

Lines ``value i 0 0 0`` are accepted and ignored (orbital energies in some
FCIDUMP writers).
"""
from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

import numpy as np

from .circuit import Circuit, gate_counts, parallel_depth
from .hamiltonian import HERMITICITY_TOL, SpinOrbitalIntegrals

SCHEMA_VERSION = 1
CSV_COLUMNS = ("n", "ordering", "fix", "style", "error_hartree")


def parse_integrals(text: str) -> SpinOrbitalIntegrals:
    norb = nelec = occ = None
    core = 0.0
    one: dict[tuple[int, int], float] = {}
    two: dict[tuple[int, int, int, int], float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue

        def fail(msg):
            raise ValueError(f"line {lineno}: {msg}: {raw.strip()!r}")

        head = tokens[0].lower()
        if head in ("norb", "nelec", "occ"):
            try:
                values = [int(x) for x in tokens[1:]]
            except ValueError:
                fail(f"'{head}' expects integers")
            if head == "occ":
                occ = tuple(values)
            elif len(values) != 1:
                fail(f"'{head}' expects one integer")
            elif head == "norb":
                if values[0] <= 0:
                    fail("norb must be positive")
                norb = values[0]
            else:
                nelec = values[0]
            continue
        if norb is None:
            fail("entry before the 'norb' header")
        if len(tokens) != 5:
            fail("expected 'value p q r s'")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            idx = tuple(int(x) for x in tokens[1:])
        except ValueError:
            fail("malformed number")
        if any(i < 0 or i > norb for i in idx):
            fail(f"index out of range 0..{norb} in entry {idx}")
        p, q, r, s = idx
        if idx == (0, 0, 0, 0):
            core += value
        elif q == r == s == 0:
            continue
        elif r == s == 0 and p and q:
            one[(p - 1, q - 1)] = one.get((p - 1, q - 1), 0.0) + value
        elif all(idx):
            key = (p - 1, q - 1, r - 1, s - 1)
            two[key] = two.get(key, 0.0) + value
        else:
            fail(f"unsupported index pattern {idx}")
    if norb is None:
        raise ValueError("missing 'norb' header")
    t = np.zeros((norb, norb))
    for (i, j), value in one.items():
        if i != j and (j, i) in one and abs(one[(j, i)] - value) > HERMITICITY_TOL:
            raise ValueError(f"t entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) disagree: {value!r} vs {one[(j, i)]!r}")
        t[i, j] = t[j, i] = value
    if occ is not None and nelec is not None and sum(occ) != nelec:
        raise ValueError(f"occupation {occ} does not hold nelec={nelec} electrons")
    return SpinOrbitalIntegrals(norb, t, two, occ, core)


def serialize_integrals(integrals: SpinOrbitalIntegrals) -> str:
    n = integrals.n_orbitals
    lines = [f"norb {n}"]
    if integrals.occupation is not None:
        lines.append(f"nelec {sum(integrals.occupation)}")
        lines.append("occ " + " ".join(map(str, integrals.occupation)))
    if integrals.core_energy != 0.0:
        lines.append(f"{integrals.core_energy!r} 0 0 0 0")
    for i in range(n):
        for j in range(i, n):
            if integrals.t[i, j] != 0.0:
                lines.append(f"{float(integrals.t[i, j])!r} {i + 1} {j + 1} 0 0")
    for key in sorted(integrals.v):
        value = integrals.v[key]
        if value != 0.0:
            lines.append(f"{value!r} " + " ".join(str(i + 1) for i in key))
    return "\n".join(lines) + "\n"


def read_integrals(path) -> SpinOrbitalIntegrals:
    return parse_integrals(Path(path).read_text())


def write_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def circuit_summary(c: Circuit) -> dict:
    return {
        "n_system": c.n_system,
        "n_parity": c.n_parity,
        "has_phase": c.has_phase,
        "gate_counts": gate_counts(c),
        "depth": {
            "phase_fanout": parallel_depth(c, True),
            "no_phase_fanout": parallel_depth(c, False),
        },
    }


def run_report(c: Circuit, config: dict | None = None, passes=None, spectral=None, extra: dict | None = None) -> dict:
    report = {"schema_version": SCHEMA_VERSION, **circuit_summary(c)}
    report["config"] = dict(config or {})
    report["passes"] = passes.to_dict() if passes is not None else None
    if spectral is not None:
        report["spectral"] = spectral
    if extra:
        report.update(extra)
    report["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return report


def dumps_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def strip_volatile(report: dict) -> dict:
    """Report without fields excluded from golden comparison."""
    return {k: v for k, v in report.items() if k != "timestamp"}


def sweep_csv(rows: Iterable) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([r.n, r.ordering, "on" if r.fix else "off", r.style, repr(float(r.error_hartree))])
    return buf.getvalue()
