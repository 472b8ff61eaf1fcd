"""Command-line front end: ``fracdr <command> ...``.

Exit codes: 0 success, 2 invalid input (bad flags, schema or domain
violations), 3 accuracy failure (a numerical target was not met).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import fields
from importlib import resources
from pathlib import Path

import numpy as np

from fracdr.catalog import catalog, get_case
from fracdr.closedform import Example1Params, Example3Params, solve_example1, solve_example3
from fracdr.data import HistorySpec, InitialData, parse_key
from fracdr.errors import AccuracyError, AmbiguousBasisError, DomainError, NotInvariantError, SchemaError
from fracdr.fracops import FracKind, FracOrder
from fracdr.mlf import ml
from fracdr.oracle import FddeProblem, compare, pde_residual, solve_classical, solve_fdde
from fracdr.subspace import ReducedSystem, check_invariance, load_spec

EXIT_OK, EXIT_INPUT, EXIT_ACCURACY = 0, 2, 3


def load_defaults() -> dict:
    text = resources.files("fracdr").joinpath("defaults.json").read_text()
    return json.loads(text)


DEFAULTS = load_defaults()


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 as well; keep the message short
        self.print_usage(sys.stderr)
        raise SystemExit(f"{self.prog}: error: {message}") from None


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None


def _read_json(path: str):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"invalid JSON in {path}: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# run configuration


def _number_map(obj, pointer: str) -> dict:
    if not isinstance(obj, dict):
        raise SchemaError(pointer, "expected an object of coordinate values")
    out = {}
    for key, v in obj.items():
        try:
            parse_key(key)
        except DomainError:
            raise SchemaError(f"{pointer}/{key}", "expected a key such as \"11\"") from None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise SchemaError(f"{pointer}/{key}", "expected a number")
        out[key] = float(v)
    return out


def _example_config(args) -> tuple:
    """Parameters, data and history for ``--example`` with optional JSON overrides."""
    base = DEFAULTS["examples"][str(args.example)]
    cls = Example1Params if args.example == 1 else Example3Params
    params = dict(base["params"])
    data = {"beta": dict(base["beta"]), "kappa": dict(base["kappa"]), "phi": dict(base["phi"])}
    if args.params:
        doc = _read_json(args.params)
        if not isinstance(doc, dict):
            raise SchemaError("", "expected an object of coefficients")
        names = {f.name for f in fields(cls)}
        for key, v in doc.items():
            if key not in names:
                raise SchemaError(f"/{key}", f"unknown coefficient for example {args.example}")
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise SchemaError(f"/{key}", "expected a number")
        params.update(doc)
    if args.data:
        doc = _read_json(args.data)
        if not isinstance(doc, dict):
            raise SchemaError("", "expected an object with beta, kappa, phi")
        for key, v in doc.items():
            if key not in data:
                raise SchemaError(f"/{key}", "unknown field (expected beta, kappa or phi)")
            data[key] = _number_map(v, f"/{key}")
    return (cls(**params), InitialData(data["beta"], data["kappa"]), HistorySpec(data["phi"]))


def _alphas(args) -> tuple:
    a = list(args.alpha)
    if args.example == 3:
        if len(a) != 1 and not (len(a) == 2 and a[0] == a[1]):
            raise DomainError("example 3 uses one order for both components")
        return (a[0],)
    if len(a) == 1:
        a = a * 2
    if len(a) != 2:
        raise DomainError("give one or two orders")
    return tuple(a)


def _field(args, check_history: bool = True):
    params, data, hist = _example_config(args)
    alphas = _alphas(args)
    for a in alphas:
        FracOrder(a, args.kind)
    if args.example == 1:
        return solve_example1(params, args.kind, alphas, data, hist, check_history=check_history)
    return solve_example3(params, args.kind, alphas[0], data, hist, verbatim=getattr(args, "verbatim", False),
                          check_history=check_history)


def _step(args, tau: float) -> float:
    return args.h if args.h is not None else tau / DEFAULTS["h_per_tau"]


def _trajectory_csv(t, traj: dict) -> str:
    keys = sorted(traj)
    header = ["t"] + [f"delta_{k}{i}" for k, i in keys]
    rows = zip(t, *(np.asarray(traj[key], float) for key in keys))
    return _csv(header, rows)


# ---------------------------------------------------------------------------
# commands


def cmd_ml(args) -> int:
    vals = np.atleast_1d(ml(args.alpha, args.beta, args.gamma, np.asarray(args.z, float)))
    for z, v in zip(args.z, vals):
        print(f"{_fmt(z)} {_fmt(v)}")
    return EXIT_OK


def cmd_catalog(args) -> int:
    if args.action == "list":
        for c in catalog():
            flag = "discrepancy" if c.has_discrepancy else "as printed"
            print(f"{c.case_id:<5} {c.family:<28} {flag}")
        return EXIT_OK
    if not args.case:
        raise DomainError("catalog show needs a case identifier")
    try:
        case = get_case(args.case)
    except KeyError as exc:
        raise DomainError(str(exc.args[0])) from None
    print(case.describe())
    return EXIT_OK


def cmd_check(args) -> int:
    op, space = load_spec(_read_text(args.spec))
    report = check_invariance(op, space)
    print(report.summary())
    if report.invariant:
        print("reduced system:")
        print(report.reduced.pretty())
    return EXIT_OK


def cmd_reduce(args) -> int:
    op, space = load_spec(_read_text(args.spec))
    report = check_invariance(op, space)
    if not report.invariant:
        raise NotInvariantError(report.summary())
    rs = report.reduced
    if args.alpha:
        if len(args.alpha) not in (1, 2):
            raise DomainError("give one or two orders")
        rs = rs.with_orders(tuple(args.alpha) * (2 // len(args.alpha)))
    text = rs.to_json()
    print(rs.pretty())
    print(text)
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    return EXIT_OK


def cmd_solve(args) -> int:
    f = _field(args)
    T = args.T if args.T is not None else DEFAULTS["T"]
    if args.nt < 2 or args.nx < 1:
        raise DomainError("need nt >= 2 and nx >= 1")
    if f.kind is FracKind.RL:
        # Riemann-Liouville fields are singular at t = 0; start one step later
        t = T * np.arange(1, args.nt + 1) / args.nt
    else:
        t = np.linspace(0.0, T, args.nt)
    x = np.linspace(args.x_range[0], args.x_range[1], args.nx)
    traj = f.trajectories(t)
    u1, u2 = f.u(1, x, t, traj), f.u(2, x, t, traj)
    rows = ((tv, xv, u1[it, ix], u2[it, ix]) for it, tv in enumerate(t) for ix, xv in enumerate(x))
    _write(args.out, _csv(["t", "x", "u1", "u2"], rows))
    if args.traj_out:
        _write(args.traj_out, _trajectory_csv(t, traj))
    return EXIT_OK


def _integrate(problem: FddeProblem, method: str) -> dict:
    if method == "rk4":
        return solve_classical(problem)
    return solve_fdde(problem)


def cmd_oracle(args) -> int:
    T = args.T if args.T is not None else DEFAULTS["T"]
    rtol = args.rtol if args.rtol is not None else DEFAULTS["rtol"]
    if args.system:
        if args.compare:
            raise DomainError("--compare needs --example, not --system")
        doc = _read_json(args.system)
        rs = ReducedSystem.from_json_dict(doc)
        alphas = list(args.alpha) if args.alpha else [a for a in rs.alpha]
        if len(alphas) == 1:
            alphas = alphas * 2
        if any(a is None for a in alphas):
            raise DomainError("orders missing: pass --alpha or reduce with --alpha")
        data = {"beta": {}, "kappa": {}, "phi": {}}
        if args.data:
            doc = _read_json(args.data)
            for key in data:
                data[key] = _number_map(doc.get(key, {}), f"/{key}")
        hist = HistorySpec(data["phi"])
        problem = FddeProblem(rs, tuple(float(a) for a in alphas), InitialData(data["beta"], data["kappa"]),
                              hist, T=T, h=_step(args, float(min(rs.tau))))
        traj = _integrate(problem, args.method)
        t = next(iter(traj.values())).times
        _write(args.out, _trajectory_csv(t, {k: v.values for k, v in traj.items()}))
        return EXIT_OK

    if args.example is None:
        raise DomainError("oracle needs --example or --system")
    if FracKind.parse(args.kind) is not FracKind.CAPUTO:
        raise DomainError("forward integration supports Caputo derivatives only")
    f = _field(args)
    h = _step(args, min(float(v) for v in f.op.tau))
    problem = FddeProblem(f.reduced, f.orders, f.data, f.history, T=T, h=h)
    traj = _integrate(problem, args.method)
    t = next(iter(traj.values())).times
    if args.out:
        _write(args.out, _trajectory_csv(t, {k: v.values for k, v in traj.items()}))
    if not args.compare:
        return EXIT_OK
    closed = f.trajectories(t)
    dev = compare(closed, {k: v.values for k, v in traj.items()}, rtol=rtol, atol=DEFAULTS["atol"])
    for key, v in sorted(dev.items()):
        print(f"delta_{key[0]}{key[1]}: {v:.6e}")
    worst = max(dev.values())
    print(f"max deviation: {worst:.6e} (rtol {rtol:g}, atol {DEFAULTS['atol']:g})")
    return EXIT_OK if worst <= 1.0 else EXIT_ACCURACY


def cmd_residual(args) -> int:
    rd = DEFAULTS["residual"]
    f = _field(args)
    nt, nx = args.grid if args.grid else (rd["nt"], rd["nx"])
    t_range = args.t_range or rd["t_range"]
    x_range = args.x_range or rd["x_range"]
    rep = pde_residual(f, f.op, t_range, x_range, nt=nt, nx=nx)
    if args.out:
        _write(args.out, rep.to_csv())
    tol = args.tol
    if tol is None:
        tol = rd["tol_rl"] if f.kind is FracKind.RL else rd["tol_caputo"]
    print(rep.summary())
    worst = rep.normalized()
    print(f"normalized residual: {worst:.6e} (tolerance {tol:g})")
    return EXIT_OK if worst <= tol else EXIT_ACCURACY


# ---------------------------------------------------------------------------
# argument parsing


def _add_example_args(p, alpha_required: bool = True) -> None:
    p.add_argument("--example", type=int, choices=(1, 3), required=alpha_required,
                   help="worked system: 1 (decoupled) or 3 (coupled)")
    p.add_argument("--kind", default="caputo", choices=("caputo", "rl"), help="derivative kind (default caputo)")
    p.add_argument("--alpha", type=float, nargs="+", required=alpha_required,
                   help="order(s) in (0, 2]; one value is used for both components")
    p.add_argument("--params", help="JSON object overriding the example coefficients")
    p.add_argument("--data", help="JSON object with beta, kappa and phi maps keyed like \"11\"")


def build_parser() -> argparse.ArgumentParser:
    d = DEFAULTS
    parser = _Parser(prog="fracdr", description=(
        "Invariant subspaces, reduced delay systems and closed-form solutions of coupled "
        "time-fractional diffusion-reaction systems. Defaults are read from defaults.json: "
        f"h = tau/{d['h_per_tau']}, N_quad = {d['n_quad']}, rtol = {d['rtol']:g}, atol = {d['atol']:g}."))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ml", help="three-parameter Mittag-Leffler function")
    p.add_argument("action", choices=("eval",))
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("z", type=float, nargs="+")
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("catalog", help="list or show exponential-space catalog cases")
    p.add_argument("action", choices=("list", "show"))
    p.add_argument("case", nargs="?")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("check", help="invariance check of a JSON operator/space spec")
    p.add_argument("spec")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="reduced delay system of an invariant spec")
    p.add_argument("spec")
    p.add_argument("--alpha", type=float, nargs="+", help="record orders in the JSON output")
    p.add_argument("--json-out", help="also write the JSON form to this file")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="closed-form field on a grid (long CSV: t, x, u1, u2)")
    _add_example_args(p)
    p.add_argument("--verbatim", action="store_true", help="example 3: literal listing instead of the solving kernels")
    p.add_argument("--T", type=float, help=f"horizon (default {d['T']})")
    p.add_argument("--nt", type=int, default=d["solve"]["nt"],
                   help="time samples; on [0, T] for Caputo, at j T / nt (j = 1..nt) for RL")
    p.add_argument("--nx", type=int, default=d["solve"]["nx"])
    p.add_argument("--x-range", type=float, nargs=2, default=d["solve"]["x_range"])
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--traj-out", help="per-coordinate CSV: t, delta_11, ...")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="numerical integration of a reduced system; --compare checks a closed form")
    _add_example_args(p, alpha_required=False)
    p.add_argument("--system", help="reduced-system JSON written by `reduce --json-out`")
    p.add_argument("--compare", action="store_true", help="print max deviation of closed form vs integrator")
    p.add_argument("--method", choices=("abm", "rk4"), default="abm", help="rk4 needs integer orders")
    p.add_argument("--T", type=float, help=f"horizon (default {d['T']})")
    p.add_argument("--h", type=float, help="step (default tau / h_per_tau)")
    p.add_argument("--rtol", type=float, help=f"compare rtol (default {d['rtol']:g})")
    p.add_argument("--out", help="trajectory CSV path")
    p.set_defaults(func=cmd_oracle, verbatim=False)

    p = sub.add_parser("residual", help="PDE residual map of a closed-form field")
    _add_example_args(p)
    p.add_argument("--verbatim", action="store_true")
    p.add_argument("--grid", type=int, nargs=2, metavar=("NT", "NX"))
    p.add_argument("--t-range", type=float, nargs=2)
    p.add_argument("--x-range", type=float, nargs=2)
    p.add_argument("--tol", type=float, help="pass threshold on the normalized residual")
    p.add_argument("--out", help="per-point CSV path")
    p.set_defaults(func=cmd_residual)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return EXIT_INPUT
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except BrokenPipeError:
        # output cut short by the reader (e.g. piped into head)
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except SchemaError as exc:
        print(f"schema error at {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, NotInvariantError, AmbiguousBasisError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AccuracyError as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY


if __name__ == "__main__":
    sys.exit(main())
