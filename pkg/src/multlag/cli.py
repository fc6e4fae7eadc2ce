"""Command-line front end.

    multlag verify {eom,legendre,limits,hierarchy,lax,twobody} [options]
    multlag integrate [options]
    multlag hierarchy {table,reconstruct} [options]

Options may also come from ``--config FILE`` holding ``key = value`` lines;
flags given on the command line win.  Exit codes: 0 success, 1 a check
failed or a trajectory aborted, 2 invalid configuration, 3 internal error,
4 a model precondition failed (domain, degenerate start, speed limit).
Errors are reported on stderr as ``{"error": {"type", "message", "exit_code"}}``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

from .dynamics import Flow, Method, conserved_drift, integrate_hamiltonian, integrate_lagrangian
from .errors import ConfigError, HierarchyOrderOverflow, MultlagError
from .hamiltonians import HamiltonianModel, kinetic_momentum
from .hierarchy import hierarchy_table, series_residuals_nr, series_residuals_rel
from .lagrangians import Family, LagrangianModel, ModelParams
from .potentials import Potential, parse_potential
from .twobody import integrate_twobody_hamiltonian, integrate_twobody_lagrangian
from .verify import SUITES, Scenario, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL, EXIT_PRECONDITION = 0, 1, 2, 3, 4

ABORT_MARKER = "ABORTED"


def _bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# name: (type, help)
_MODEL_OPTS = {
    "family": (str, "model family: " + ", ".join(f.value for f in Family)),
    "j": (int, "hierarchy order (hierarchy families)"),
    "m": (float, "mass"),
    "lambda": (float, "deformation velocity lambda"),
    "c": (float, "speed of light"),
    "potential": (str, "potential spec kind:param=val,... (free, harmonic, pair-harmonic, "
                       "calogero-moser, polynomial:coeffs=a0;a1;...)"),
}
_VERIFY_OPTS = {
    "grid": (int, "grid points per axis"),
    "x-min": (float, "grid x lower bound"),
    "x-max": (float, "grid x upper bound"),
    "v-min": (float, "grid v lower bound"),
    "v-max": (float, "grid v upper bound"),
    "tol": (float, "tolerance override for the main check"),
    "samples": (int, "random sample count"),
    "seed": (int, "random seed"),
    "omega": (float, "Lax check: oscillator frequency"),
    "l": (int, "Lax check: power index"),
    "x": (float, "evaluation point x"),
    "p": (float, "evaluation point p (or v for the Lagrangian limits)"),
    "output": (str, "write the JSON report here instead of stdout"),
}
_INTEGRATE_OPTS = {
    "system": (str, "one | twobody"),
    "formulation": (str, "lagrangian | hamiltonian"),
    "flow": (str, "Hamiltonian flow: canonical | kinetic"),
    "printed-b": (_bool, "two-body: use b(x) = exp(-V/m lambda^2) in H2"),
    "x0": (float, "initial x (relative coordinate for twobody)"),
    "v0": (float, "initial velocity"),
    "p0": (float, "initial momentum (default: kinetic momentum of v0)"),
    "X0": (float, "twobody: initial X"),
    "VX0": (float, "twobody: initial X velocity"),
    "P0": (float, "twobody: initial P (default: m VX0)"),
    "dt": (float, "time step"),
    "steps": (int, "number of steps"),
    "method": (str, "rk4 | rk45"),
    "stride": (int, "record every stride-th step"),
    "output": (str, "CSV path (default stdout)"),
    "summary": (str, "summary JSON path (default stdout, or stderr when the CSV goes to stdout)"),
}
_HIERARCHY_OPTS = {
    "J": (int, "reconstruct: highest series order"),
    "relativistic": (_bool, "reconstruct: use the relativistic series"),
    "x": (float, "evaluation point x"),
    "v": (float, "evaluation point v"),
    "output": (str, "output path (default stdout)"),
}

_BOOL_OPTS = {"printed-b", "relativistic"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_opts(parser, table):
    for name, (typ, help_) in table.items():
        dest = name.replace("-", "_")
        if name in _BOOL_OPTS:
            parser.add_argument(f"--{name}", dest=dest, nargs="?", const=True, type=_bool,
                                default=argparse.SUPPRESS, help=help_)
        else:
            parser.add_argument(f"--{name}", dest=dest, type=typ, default=argparse.SUPPRESS, help=help_)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="multlag", description="Multiplicative Lagrangian and Hamiltonian toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--config", default=None, help="file of key = value lines")
    _add_opts(p, {**_MODEL_OPTS, **_VERIFY_OPTS})

    p = sub.add_parser("integrate", help="integrate a trajectory and write CSV")
    p.add_argument("--config", default=None, help="file of key = value lines")
    _add_opts(p, {**_MODEL_OPTS, **_INTEGRATE_OPTS})

    p = sub.add_parser("hierarchy", help="coefficient tables and series reconstruction")
    p.add_argument("action", choices=("table", "reconstruct"))
    p.add_argument("--config", default=None, help="file of key = value lines")
    _add_opts(p, {**_MODEL_OPTS, **_HIERARCHY_OPTS})
    return parser


def _allowed(command: str) -> dict:
    extra = {"verify": _VERIFY_OPTS, "integrate": _INTEGRATE_OPTS, "hierarchy": _HIERARCHY_OPTS}[command]
    return {**_MODEL_OPTS, **extra}


def read_config(path: str, allowed: dict) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment)."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from exc
    out = {}
    for number, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lstrip("-")
        if not sep:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        name = key if key in allowed else key.replace("_", "-")
        if name not in allowed:
            raise ConfigError(f"{path}:{number}: unknown key {key!r}")
        typ = allowed[name][0]
        try:
            out[name.replace("-", "_")] = typ(value.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{number}: bad value for {key!r}: {value.strip()!r}") from exc
    return out


def _merge(args: argparse.Namespace) -> dict:
    opts = {}
    if getattr(args, "config", None):
        opts.update(read_config(args.config, _allowed(args.command)))
    opts.update({k: v for k, v in vars(args).items() if k not in ("config",)})
    return opts


def _model_parts(opts: dict, default_family: Optional[str]):
    try:
        params = ModelParams(m=opts.get("m", 1.0), lam=opts.get("lambda", 1.0), c=opts.get("c", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    family = opts.get("family", default_family)
    if family is not None:
        try:
            family = Family(family)
        except ValueError as exc:
            raise ConfigError(f"unknown family {family!r}") from exc
    j = opts.get("j")
    if family is not None and family.hierarchical:
        if j is None:
            raise ConfigError("hierarchy families need --j")
        if j < 1:
            raise ConfigError(f"--j must be >= 1, got {j}")
    pot: Optional[Potential] = parse_potential(opts["potential"]) if "potential" in opts else None
    return family, params, pot, j


# output helpers --------------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _fmt(value) -> str:
    return repr(float(value))


def _write(text: str, path: Optional[str], stream) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stream.write(text)
        stream.flush()


def trajectory_csv(traj, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    cols = [traj[name] for name in header]
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])
    if traj.aborted:
        writer.writerow([ABORT_MARKER, traj.error])
    return buf.getvalue()


# commands ------------------------------------------------------------------------


def cmd_verify(opts: dict, stdout) -> int:
    family, params, pot, j = _model_parts(opts, None)

    def pair(lo, hi):
        if lo in opts or hi in opts:
            if lo not in opts or hi not in opts:
                raise ConfigError(f"--{lo.replace('_', '-')} and --{hi.replace('_', '-')} go together")
            return (opts[lo], opts[hi])
        return None

    grid = opts.get("grid", 21)
    if grid < 1:
        raise ConfigError("--grid must be >= 1")
    scenario = Scenario(
        family=family, j=j, params=params, potential=pot, grid=grid,
        x_range=pair("x_min", "x_max"), v_range=pair("v_min", "v_max"),
        tol=opts.get("tol"), samples=opts.get("samples", 100), seed=opts.get("seed", 0),
        omega=opts.get("omega"), l=opts.get("l"), x=opts.get("x"), p=opts.get("p"),
    )
    report = run_suite(opts["suite"], scenario)
    _write(dumps(report.to_dict()), opts.get("output"), stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_integrate(opts: dict, stdout, stderr) -> int:
    family, params, pot, j = _model_parts(opts, "add-nr")
    pot = pot or parse_potential("harmonic")
    dt = opts.get("dt", 1e-3)
    steps = opts.get("steps", 1000)
    stride = opts.get("stride", 1)
    if not dt > 0 or steps < 1 or stride < 1:
        raise ConfigError("need dt > 0, steps >= 1 and stride >= 1")
    try:
        method = Method(opts.get("method", "rk4"))
        flow = Flow(opts.get("flow", "canonical"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    system = opts.get("system", "one")
    formulation = opts.get("formulation", "lagrangian")
    if formulation not in ("lagrangian", "hamiltonian"):
        raise ConfigError(f"unknown formulation {formulation!r}")

    if system == "twobody":
        X0, x0 = opts.get("X0", 0.0), opts.get("x0", 1.0)
        VX0, vx0 = opts.get("VX0", 0.0), opts.get("v0", 0.0)
        if formulation == "lagrangian":
            traj = integrate_twobody_lagrangian(params, pot, X0, x0, VX0, vx0, dt, steps, method,
                                                stride=stride)
        else:
            P0 = opts.get("P0", params.m * VX0)
            p0 = opts.get("p0", params.m * vx0)
            traj = integrate_twobody_hamiltonian(params, pot, X0, x0, P0, p0, dt, steps, method,
                                                 flow=flow.value, printed_b=opts.get("printed_b", False),
                                                 stride=stride)
        header = ("t", "X", "x", "VX", "vx", "H_model")
    elif system == "one":
        x0, v0 = opts.get("x0", 1.0), opts.get("v0", 0.0)
        if formulation == "lagrangian":
            traj = integrate_lagrangian(LagrangianModel(family, params, pot, j), x0, v0, dt, steps,
                                        method, stride=stride)
        else:
            p0 = opts.get("p0")
            if p0 is None:
                p0 = kinetic_momentum(params, v0, family.relativistic)
            traj = integrate_hamiltonian(HamiltonianModel(family, params, pot, j), x0, p0, dt, steps,
                                         method, flow=flow, stride=stride)
        header = ("t", "x", "v", "p", "H_std", "H_model")
    else:
        raise ConfigError(f"unknown system {system!r}")

    csv_path = opts.get("output")
    _write(trajectory_csv(traj, header), csv_path, stdout)
    final = {name: float(traj[name][-1]) for name in header}
    summary = {
        "command": "integrate",
        "model": traj.model,
        "method": method.value,
        "dt": dt,
        "steps": steps,
        "stride": stride,
        "rows": len(traj),
        "aborted": traj.aborted,
        "error": traj.error,
        "conserved_drift": conserved_drift(traj),
        "final": final,
    }
    summary_path = opts.get("summary")
    _write(dumps(summary), summary_path, stderr if (csv_path is None and summary_path is None) else stdout)
    if traj.aborted:
        _error(stderr, "TrajectoryAborted", traj.error, EXIT_FAIL)
        return EXIT_FAIL
    return EXIT_OK


def cmd_hierarchy(opts: dict, stdout) -> int:
    if opts["action"] == "table":
        if "j" not in opts:
            raise ConfigError("hierarchy table needs --j")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("j", "k", "numerator", "denominator"))
        writer.writerows(hierarchy_table(opts["j"]))
        _write(buf.getvalue(), opts.get("output"), stdout)
        return EXIT_OK

    _, params, pot, _ = _model_parts({k: v for k, v in opts.items() if k != "family"}, None)
    pot = pot or parse_potential("harmonic")
    J = opts.get("J", 12)
    if J < 0:
        raise ConfigError("--J must be >= 0")
    rel = opts.get("relativistic", False)
    x, v = opts.get("x", 0.5), opts.get("v", 0.5)
    rows = (series_residuals_rel if rel else series_residuals_nr)(params, pot, x, v, J)
    target = rows[-1].target
    floor = 4 * 2.0**-52 * abs(target)
    above = [r.residual for r in rows if r.residual > floor]
    monotone = all(b <= a for a, b in zip(above, above[1:]))
    out = {
        "command": "hierarchy reconstruct",
        "relativistic": rel,
        "x": x,
        "v": v,
        "target": target,
        "rows": [{"J": n, "partial_sum": r.partial_sum, "residual": r.residual} for n, r in enumerate(rows)],
        "monotone_decay": monotone,
    }
    _write(dumps(out), opts.get("output"), stdout)
    return EXIT_OK if monotone else EXIT_FAIL


def _error(stream, kind: str, message: str, code: int) -> None:
    stream.write(dumps({"error": {"type": kind, "message": message, "exit_code": code}}))
    stream.flush()


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        opts = _merge(args)
        if args.command == "verify":
            return cmd_verify(opts, stdout)
        if args.command == "integrate":
            return cmd_integrate(opts, stdout, stderr)
        return cmd_hierarchy(opts, stdout)
    except (ConfigError, HierarchyOrderOverflow) as exc:
        _error(stderr, type(exc).__name__, str(exc), EXIT_CONFIG)
        return EXIT_CONFIG
    except MultlagError as exc:
        # a precondition violated by the requested scenario (domain, degenerate start, ...)
        _error(stderr, type(exc).__name__, str(exc), EXIT_PRECONDITION)
        return EXIT_PRECONDITION
    except (ValueError, OSError) as exc:
        _error(stderr, type(exc).__name__, str(exc), EXIT_CONFIG)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort machine-readable report
        _error(stderr, type(exc).__name__, str(exc), EXIT_INTERNAL)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
