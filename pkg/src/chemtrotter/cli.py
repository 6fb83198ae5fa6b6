"""Command line: ``chemtrotter {compile,report,simulate,sweep}``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io
from .circuit import Circuit
from .pauli import PauliString, SubtermOrder
from .simulator import (
    error_scaling_fit,
    pauli_step_errors,
    reference_spectrum,
    sweep,
    trotter_ground_energy,
)
from .synth import QubitOrder, Style, SynthOptions
from .trotter import OrderStrategy, TrotterPlan, TsOrder, compile_step


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _csv_list(text: str, cast=str) -> list:
    items = [x.strip() for x in text.split(",") if x.strip()]
    if not items:
        raise CliError(f"empty list {text!r}")
    return [cast(x) for x in items]


def _on_off(x: str) -> bool:
    if x not in ("on", "off"):
        raise CliError(f"expected on/off, got {x!r}")
    return x == "on"


def _emit(text: str, path: str | None) -> None:
    if path:
        io.write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _synth_options(args) -> SynthOptions:
    return SynthOptions(Style(args.style), QubitOrder(args.qubit_order), SubtermOrder(args.subterm_order))


def cmd_compile(args) -> None:
    integrals = io.read_integrals(args.input)
    plan = TrotterPlan(
        order_strategy=OrderStrategy(args.order),
        ts_order=TsOrder(args.ts_order),
        n_steps=1,
        total_time=args.dt,
        synth=_synth_options(args),
        diagonal_fix=args.diagonal_fix,
        nest=args.nest,
        cancel=args.cancel,
    )
    step = compile_step(integrals, plan)
    extra = {"n_terms": len(step.terms), "nesting_applied": step.nesting_applied, "n_layers": len(step.layers)}
    report = io.run_report(step.circuit, plan.to_dict(), step.report if plan.cancel else None, extra=extra)
    text = step.circuit.to_text()
    report_text = io.dumps_report(report)
    # write both only after everything succeeded
    if args.out:
        io.write_atomic(args.out, text)
    _emit(report_text, args.report)


def cmd_report(args) -> None:
    c = Circuit.from_text(Path(args.input).read_text())
    _emit(json.dumps({"schema_version": io.SCHEMA_VERSION, **io.circuit_summary(c)}, sort_keys=True, indent=2) + "\n", args.report)


def _plan_from_dict(d: dict, n_steps: int) -> TrotterPlan:
    synth = SynthOptions(
        Style(d.get("style", "ancilla")),
        QubitOrder(d.get("qubit_order", "interleaved")),
        SubtermOrder(d.get("subterm_order", "optimized")),
    )
    return TrotterPlan(
        order_strategy=OrderStrategy(d.get("order", "interleaved")),
        ts_order=TsOrder(int(d.get("ts_order", 1))),
        n_steps=n_steps,
        total_time=float(d.get("total_time", 1.0)),
        synth=synth,
        diagonal_fix=bool(d.get("diagonal_fix", False)),
        nest=bool(d.get("nest", False)),
        cancel=bool(d.get("cancel", False)),
    )


def cmd_simulate(args) -> None:
    plan = json.loads(Path(args.plan).read_text())
    n_values = [int(n) for n in plan.get("n_values", [1])]
    if plan.get("kind") == "pauli":
        paulis = [PauliString(letters, float(w)) for letters, w in plan["terms"]]
        points = pauli_step_errors(paulis, n_values, float(plan.get("total_time", 1.0)))
        results = [{"n": n, "error": e} for n, e in points]
    else:
        if not args.input:
            raise CliError("simulate needs --in for integral plans")
        integrals = io.read_integrals(args.input)
        exact = None
        results = []
        for n in n_values:
            tp = _plan_from_dict(plan, n)
            if exact is None:
                exact = reference_spectrum(integrals, tp.synth.qubit_order)
            step = compile_step(integrals, tp)
            res = trotter_ground_energy(step.circuit, tp.delta_t, exact.ground_vector, exact.ground_energy)
            results.append({"n": n, **res.to_dict()})
        points = [(r["n"], r["error"]) for r in results]
    out = {"schema_version": io.SCHEMA_VERSION, "plan": plan, "results": results}
    if len(points) >= 3:
        slope, intercept = error_scaling_fit(points)
        out["fit"] = {"slope": slope, "intercept": intercept}
    _emit(json.dumps(out, sort_keys=True, indent=2) + "\n", args.out)


def cmd_sweep(args) -> None:
    integrals = io.read_integrals(args.input)
    base = TrotterPlan(synth=_synth_options(args), ts_order=TsOrder(args.ts_order))
    rows = sweep(
        integrals,
        _csv_list(args.n, int),
        [OrderStrategy(o) for o in _csv_list(args.orders)],
        [_on_off(f) for f in _csv_list(args.fix)],
        base,
    )
    _emit(io.sweep_csv(rows), args.out)


def _add_synth_flags(p, style_default="ancilla"):
    p.add_argument("--style", choices=[s.value for s in Style], default=style_default)
    p.add_argument("--qubit-order", choices=[q.value for q in QubitOrder], default="interleaved")
    p.add_argument("--subterm-order", choices=[s.value for s in SubtermOrder], default="optimized")
    p.add_argument("--ts-order", type=int, choices=(1, 2), default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chemtrotter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compile", help="compile one controlled Trotter step")
    p.add_argument("--in", dest="input", required=True)
    _add_synth_flags(p)
    p.add_argument("--order", choices=[o.value for o in OrderStrategy], default="interleaved")
    p.add_argument("--nest", action="store_true")
    p.add_argument("--cancel", action="store_true")
    p.add_argument("--diagonal-fix", action="store_true")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--out", help="circuit text file")
    p.add_argument("--report", help="JSON report file (default stdout)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("report", help="gate counts and depth of a circuit file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("simulate", help="Trotter ground-energy errors for a JSON plan")
    p.add_argument("--in", dest="input")
    p.add_argument("--plan", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="error table over n, ordering and diagonal fix (CSV)")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--n", default="2,4,8,16")
    p.add_argument("--orders", default="lex,interleaved")
    p.add_argument("--fix", default="off,on")
    _add_synth_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except Exception as exc:  # every failure becomes a JSON error object
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
