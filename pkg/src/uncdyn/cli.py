"""``uncdyn`` command line: scenario files in, CSV tables and exit codes out.

Exit codes: 0 pass, 1 verification failure, 2 input or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import jsonschema
import numpy as np

from .dynamics import NumericalInconsistencyError, StateVector
from .linalg import ConvergenceError
from .models import ObservablePair, OscillatorModel, SpinModel
from .verifier import (
    CustomModel,
    FDCheckSettings,
    Grid,
    Scenario,
    ScenarioError,
    SweepReport,
    Tolerances,
    check_inequality,
    compare_numeric_analytic,
    finite_difference_check,
    run_sweep,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2

CSV_COLUMNS = (
    "t1",
    "t2",
    "delta_a_t1",
    "delta_b_t2",
    "lhs",
    "rhs",
    "slack",
    "commutator_im",
    "analytic_lhs",
    "analytic_rhs",
    "lhs_err",
    "rhs_err",
)


class ScenarioSyntaxError(ScenarioError):
    pass


class ScenarioSchemaError(ScenarioError):
    pass


class ScenarioInvariantError(ScenarioError):
    pass


_POS = {"type": "number", "exclusiveMinimum": 0}
_COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_VECTOR = {"type": "array", "items": _COMPLEX, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}
_GRID = {
    "type": "object",
    "properties": {
        "start": {"type": "number"},
        "stop": {"type": "number"},
        "count": {"type": "integer", "minimum": 1},
    },
    "required": ["start", "stop", "count"],
    "additionalProperties": False,
}


def _pair_schema(names):
    return {"type": "array", "items": {"enum": list(names)}, "minItems": 2, "maxItems": 2}


def _when(model, then):
    return {"if": {"properties": {"model": {"const": model}}}, "then": then}


SCENARIO_SCHEMA = {
    "type": "object",
    "properties": {
        "model": {"enum": ["spin", "oscillator", "custom"]},
        "params": {"type": "object"},
        "state": {"type": "object"},
        "pair": {"type": "array"},
        "t1_grid": _GRID,
        "t2_grid": _GRID,
        "tolerances": {
            "type": "object",
            "properties": {"ineq": _POS, "oracle": _POS},
            "additionalProperties": False,
        },
        "fdcheck": {
            "type": "object",
            "properties": {
                "times": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "step": _POS,
                "threshold": _POS,
            },
            "additionalProperties": False,
        },
    },
    "required": ["model", "params", "t1_grid", "t2_grid"],
    "additionalProperties": False,
    "allOf": [
        _when(
            "spin",
            {
                "properties": {
                    "params": {
                        "properties": {"omega": _POS, "hbar": _POS},
                        "additionalProperties": False,
                    },
                    "state": {
                        "properties": {"theta": {"type": "number"}},
                        "additionalProperties": False,
                    },
                    "pair": _pair_schema(["Sx", "Sy"]),
                },
                "required": ["pair"],
            },
        ),
        _when(
            "oscillator",
            {
                "properties": {
                    "params": {
                        "properties": {
                            "mass": _POS,
                            "omega": _POS,
                            "hbar": _POS,
                            "fock_dim": {"type": "integer", "minimum": 4},
                        },
                        "additionalProperties": False,
                    },
                    "state": {
                        "properties": {"amplitudes": _VECTOR},
                        "additionalProperties": False,
                    },
                    "pair": _pair_schema(["X", "P"]),
                },
                "required": ["pair"],
            },
        ),
        _when(
            "custom",
            {
                "properties": {
                    "params": {
                        "properties": {
                            "hbar": _POS,
                            "hamiltonian": _MATRIX,
                            "observable_a": _MATRIX,
                            "observable_b": _MATRIX,
                        },
                        "required": ["hamiltonian", "observable_a", "observable_b"],
                        "additionalProperties": False,
                    },
                    "state": {
                        "properties": {"amplitudes": _VECTOR},
                        "required": ["amplitudes"],
                        "additionalProperties": False,
                    },
                },
                "required": ["state"],
                "not": {"required": ["pair"]},
            },
        ),
    ],
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


def _reject_duplicates(pairs):
    out = {}
    for key, value in pairs:
        if key in out:
            raise ScenarioSyntaxError(f"duplicate key {key!r}")
        out[key] = value
    return out


def _reject_constant(name):
    raise ScenarioSyntaxError(f"non-finite number {name} is not allowed")


def _location(path) -> str:
    return "/".join(str(p) for p in path) or "<root>"


def _complex_vector(rows) -> np.ndarray:
    return np.array([complex(re, im) for re, im in rows], dtype=np.complex128)


def _complex_matrix(rows, name: str) -> np.ndarray:
    widths = {len(r) for r in rows}
    if len(widths) != 1 or widths.pop() != len(rows):
        raise ScenarioInvariantError(f"params/{name}: matrix must be square")
    return np.array([_complex_vector(r) for r in rows])


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a JSON scenario document.

    Raises:
        ScenarioSyntaxError: malformed JSON, with line and column.
        ScenarioSchemaError: structure or value outside the schema, naming the key.
        ScenarioInvariantError: well-formed but physically invalid input.
    """
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicates, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None

    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (list(map(str, e.path)), e.message))
    if errors:
        # if/then failures duplicate their nested causes; keep the specific ones
        specific = [e for e in errors if e.validator not in ("if", "allOf")] or errors
        lines = [f"{_location(e.absolute_path)}: {e.message}" for e in specific]
        raise ScenarioSchemaError("; ".join(lines))

    kind = doc["model"]
    params = doc["params"]
    state = doc.get("state", {})
    try:
        if kind == "spin":
            model = SpinModel(theta=state.get("theta", 0.0), **params)
        elif kind == "oscillator":
            model = OscillatorModel(**params)
        else:
            try:
                psi = StateVector(_complex_vector(state["amplitudes"]))
            except ValueError as exc:
                raise ScenarioInvariantError(f"state/amplitudes: {exc}") from None
            model = CustomModel(
                hamiltonian=_complex_matrix(params["hamiltonian"], "hamiltonian"),
                observable_a=_complex_matrix(params["observable_a"], "observable_a"),
                observable_b=_complex_matrix(params["observable_b"], "observable_b"),
                state=psi,
                hbar=params.get("hbar", 1.0),
            )
        pair = ObservablePair.of(*doc["pair"]) if "pair" in doc else None
        fd = doc.get("fdcheck", {})
        return Scenario(
            model=model,
            pair=pair,
            t1_grid=Grid(**doc["t1_grid"]),
            t2_grid=Grid(**doc["t2_grid"]),
            tolerances=Tolerances(**doc.get("tolerances", {})),
            state_amplitudes=(
                _complex_vector(state["amplitudes"])
                if kind == "oscillator" and "amplitudes" in state
                else None
            ),
            fdcheck=FDCheckSettings(
                times=tuple(fd["times"]) if "times" in fd else None,
                step=fd.get("step", 1e-4),
                threshold=fd.get("threshold", 1e-7),
            ),
        )
    except ScenarioInvariantError:
        raise
    except ValueError as exc:
        raise ScenarioInvariantError(str(exc)) from None


def _num(x: float) -> str:
    # repr is the shortest string that round-trips a double
    return repr(float(x))


def emit_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for k, r in enumerate(report.records):
        row = [
            _num(r.t1),
            _num(r.t2),
            _num(r.delta_a_t1),
            _num(r.delta_b_t2),
            _num(r.lhs),
            _num(r.rhs),
            _num(r.slack),
            _num(r.commutator_expectation.imag),
        ]
        if report.has_oracle:
            al, ar = report.analytic_lhs[k], report.analytic_rhs[k]
            row += [_num(al), _num(ar), _num(abs(r.lhs - al)), _num(abs(r.rhs - ar))]
        else:
            row += ["", "", "", ""]
        writer.writerow(row)
    return buf.getvalue()


def demo_scenarios(count: int = 41) -> dict[str, Scenario]:
    """The four spin and four oscillator pairs on a ``[0, 2 pi]`` grid."""
    grid = Grid(0.0, 2 * math.pi, count)
    spin = SpinModel(omega=1.0, hbar=1.0, theta=math.pi / 3)
    osc = OscillatorModel()
    out = {}
    for model, names in ((spin, ("Sx", "Sy")), (osc, ("X", "P"))):
        kind = "spin" if model is spin else "oscillator"
        for first, second in ((names[0], names[1]), (names[1], names[0]), (names[0], names[0]), (names[1], names[1])):
            out[f"{kind}_{first}_{second}"] = Scenario(
                model=model, pair=ObservablePair.of(first, second), t1_grid=grid, t2_grid=grid
            )
    return out


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _summary(report: SweepReport) -> list[str]:
    lines = [
        f"records: {len(report.records)}",
        f"min_slack: {_num(report.min_slack)}",
        f"violations: {len(report.violations)}",
    ]
    if report.has_oracle and report.records:
        errs = compare_numeric_analytic(report)
        lines += [f"lhs_err: {_num(errs.lhs_err)}", f"rhs_err: {_num(errs.rhs_err)}"]
    else:
        lines.append("oracle: none")
    return lines


def _cmd_sweep(args, scenario: Scenario) -> int:
    report = run_sweep(scenario, max_workers=args.workers)
    _write(emit_csv(report), args.out)
    if args.out is not None:
        print("\n".join(_summary(report)))
    return EXIT_OK


def _cmd_demo(args) -> int:
    outdir = Path(args.out or "demo")
    outdir.mkdir(parents=True, exist_ok=True)
    for name, scenario in demo_scenarios().items():
        report = run_sweep(scenario, max_workers=args.workers)
        path = outdir / f"{name}.csv"
        path.write_text(emit_csv(report), encoding="utf-8")
        print(f"{name}: {len(report.records)} records, min_slack {_num(report.min_slack)} -> {path}")
    return EXIT_OK


def _cmd_verify(args, scenario: Scenario) -> int:
    report = run_sweep(scenario, max_workers=args.workers)
    if args.out is not None:
        _write(emit_csv(report), args.out)
    ok = True
    for line in _summary(report):
        print(line)
    ineq = check_inequality(report, scenario.tolerances.ineq)
    if not ineq.passed:
        ok = False
        for k, t1, t2 in ineq.violations:
            i, j = report.grid_index(k)
            print(f"violation at grid index ({i}, {j}): t1={_num(t1)} t2={_num(t2)} "
                  f"slack={_num(report.records[k].slack)}")
    if report.has_oracle and report.records:
        errs = compare_numeric_analytic(report)
        if max(errs) > scenario.tolerances.oracle:
            ok = False
            print(f"oracle error {_num(max(errs))} exceeds oracle tolerance "
                  f"{_num(scenario.tolerances.oracle)}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_fdcheck(args, scenario: Scenario) -> int:
    sys_, a, b, _, _ = scenario.build()
    fd = scenario.fdcheck
    times = fd.times if fd.times is not None else tuple(scenario.t1_grid.points())
    ok = True
    for t in times:
        for label, obs in (("a", a), ("b", b)):
            defect = finite_difference_check(sys_, obs, t, fd.step)
            flag = defect <= fd.threshold
            ok &= flag
            print(f"t={_num(t)} observable={label} defect={_num(defect)} "
                  f"{'ok' if flag else 'EXCEEDS ' + _num(fd.threshold)}")
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uncdyn", description="Two-time uncertainty relations in the Heisenberg picture."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("sweep", "evaluate the grid and write CSV"),
        ("verify", "sweep, compare with closed forms and check the inequality"),
        ("fdcheck", "check A(t) against the Heisenberg equation by central differences"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--scenario", help="scenario JSON file")
        p.add_argument("--out", help="output path (directory for --demo)")
        p.add_argument("--ineq-tol", type=float, help="override tolerances.ineq")
        p.add_argument("--oracle-tol", type=float, help="override tolerances.oracle")
        p.add_argument("--workers", type=int, default=None, help="threads for grid evaluation")
        if name == "sweep":
            p.add_argument("--demo", action="store_true", help="write the eight built-in demonstration tables")
    return parser


def load_scenario(path: str, ineq_tol=None, oracle_tol=None) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    scenario = parse_scenario(text)
    overrides = {}
    if ineq_tol is not None:
        overrides["ineq"] = ineq_tol
    if oracle_tol is not None:
        overrides["oracle"] = oracle_tol
    if overrides:
        try:
            tol = dataclasses.replace(scenario.tolerances, **overrides)
        except ScenarioError as exc:
            raise ScenarioInvariantError(f"command line: {exc}") from None
        scenario = dataclasses.replace(scenario, tolerances=tol)
    return scenario


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK

    if args.command == "sweep" and args.demo:
        if args.scenario:
            print("error: --demo and --scenario are exclusive", file=sys.stderr)
            return EXIT_INPUT
        try:
            return _cmd_demo(args)
        except OSError as exc:
            print(f"error: cannot write output: {exc}", file=sys.stderr)
            return EXIT_INPUT
    if not args.scenario:
        print("error: --scenario is required", file=sys.stderr)
        return EXIT_INPUT

    try:
        scenario = load_scenario(args.scenario, args.ineq_tol, args.oracle_tol)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ScenarioError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT

    commands = {"sweep": _cmd_sweep, "verify": _cmd_verify, "fdcheck": _cmd_fdcheck}
    try:
        return commands[args.command](args, scenario)
    except (NumericalInconsistencyError, ConvergenceError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
