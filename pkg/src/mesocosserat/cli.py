"""Command-line surface: ``run``, ``verify`` and ``convergence``.

Exit status: 0 all checks pass, 1 a check failed, 2 usage or configuration
error. Outputs are deterministic for a given configuration and seed.

Configuration files hold flat ``dotted.key = value`` lines (``#`` starts a
comment). Recognised keys::

    scenario.name            example1 | example2 | damped-wave | manufactured-random | wave1d | appendix-table
    scenario.<parameter>     scenario parameter (a0, eps, seed, dim, amplitude, mode, k, n, cfl, t)
    material.<field>         mu_T, mu_R, rho_T, rho_R, gamma_T, gamma_R
    grid.points              points per axis (run) or comma list (convergence)
    time.dt, time.t_end, time.snapshots
    output.dir, output.format
    run.seed
    verify.only              comma list of check families
    tol.<key>                tolerance override (see suite.DEFAULT_TOL)

Command-line flags take precedence over the file; ``--set key=value`` sets
any dotted key directly.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

from . import suite
from .balance import dispersion_check, el_residuals, induced_sources
from .configurational import noether_translation_residual, phi_cancellation_check
from .constitutive import MaterialParameters, ParameterError
from .forms import Grid, basis, sample_points
from .kinematics import bianchi_residuals, integrate_transport
from .report import ResidualReport
from .scenarios import SCENARIO_PARAMS, ScenarioSpec, appendix_table

FIELD_SCENARIOS = ("example1", "example2", "damped-wave", "manufactured-random")
TOP_KEYS = {"grid.points", "time.dt", "time.t_end", "time.snapshots", "output.dir", "output.format",
            "run.seed", "verify.only"}
MATERIAL_KEYS = {"mu_T", "mu_R", "rho_T", "rho_R", "gamma_T", "gamma_R"}
AXES = "xyz"


class UsageError(Exception):
    """Bad command line or configuration (exit status 2)."""


# --------------------------------------------------------------------------- #
# configuration
# --------------------------------------------------------------------------- #

def _coerce(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{origin}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        _validate_key(key, f"{origin}:{lineno}")
        out[key] = _coerce(value)
    return out


def _validate_key(key: str, where: str):
    if key in TOP_KEYS or key == "scenario.name":
        return
    section, _, name = key.partition(".")
    if section == "material" and name in MATERIAL_KEYS:
        return
    if section == "tol" and name in suite.DEFAULT_TOL:
        return
    if section == "scenario" and any(name in p for p in SCENARIO_PARAMS.values()):
        return
    raise UsageError(f"{where}: unknown configuration key {key!r}")


def _tolerances(config: dict) -> dict:
    return {k[4:]: float(v) for k, v in config.items() if k.startswith("tol.")}


def _material(config: dict) -> MaterialParameters:
    values = {k.split(".", 1)[1]: float(v) for k, v in config.items() if k.startswith("material.")}
    try:
        return MaterialParameters.from_mapping(values)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _scenario(config: dict) -> ScenarioSpec:
    name = config.get("scenario.name")
    if name is None:
        raise UsageError("no scenario given (use --scenario or scenario.name)")
    params = {k.split(".", 1)[1]: v for k, v in config.items()
              if k.startswith("scenario.") and k != "scenario.name"}
    try:
        return ScenarioSpec(str(name), params)
    except (KeyError, ValueError) as exc:
        raise UsageError(str(exc).strip("'\"")) from exc


# --------------------------------------------------------------------------- #
# output helpers
# --------------------------------------------------------------------------- #

def fmt(v) -> str:
    """Shortest round-trip decimal for floats; plain text otherwise."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _versions() -> dict:
    out = {}
    for dist in ("artifact", "numpy", "sympy"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = "unknown"
    return out


def _basis_label(b: tuple[int, ...]) -> str:
    return "^".join("d" + AXES[a] for a in b) if b else "1"


def _component_label(value_index: tuple[int, ...], b: tuple[int, ...]) -> str:
    idx = "".join(str(i + 1) for i in value_index)
    return f"{idx}|{_basis_label(b)}" if idx else _basis_label(b)


def field_rows(t: float, grid: Grid, fields: dict):
    coords = [grid.mesh[a].ravel() for a in range(grid.dim)]
    for name, form in fields.items():
        for value_index in sorted({v for v, _ in form.comps}):
            for b in basis(grid.dim, form.degree):
                c = form.comps.get((value_index, b))
                if c is None:
                    continue
                vals = np.broadcast_to(np.asarray(c, dtype=float), grid.shape).ravel()
                label = _component_label(value_index, b)
                for k in range(vals.size):
                    yield (t, *(x[k] for x in coords), name, label, vals[k])


def _print_report(name: str, rep: ResidualReport, stream=sys.stdout):
    status = "PASS" if rep.passed else "FAIL"
    print(f"[{status}] {name}" + ("" if rep.passed else f": {', '.join(rep.failures)}"), file=stream)


# --------------------------------------------------------------------------- #
# commands
# --------------------------------------------------------------------------- #

def cmd_run(config: dict) -> int:
    spec = _scenario(config)
    out = Path(config.get("output.dir", "."))
    formats = set(str(config.get("output.format", "csv,json")).split(","))
    if not formats <= {"csv", "json"}:
        raise UsageError(f"unknown output format(s): {', '.join(sorted(formats - {'csv', 'json'}))}")
    out.mkdir(parents=True, exist_ok=True)
    params = _material(config)
    tol = _tolerances(config)
    written: list[Path] = []
    report = ResidualReport()

    if spec.name == "appendix-table":
        t = float(spec.resolved()["t"])
        rows = appendix_table(t, params=params)
        keys = ["y", "a", "Omega", "F_closed", "F_oracle", "printed_a", "printed_Omega", "printed_F",
                "a_discrepancy", "Omega_discrepancy", "F_discrepancy", "a_flag", "Omega_flag", "F_flag"]
        if "csv" in formats:
            p = out / "appendix_table.csv"
            write_csv(p, keys, ([r[k] for k in keys] for r in rows))
            written.append(p)
        report.merge(suite.check_table(tol=tol), "table.")
    elif spec.name == "wave1d":
        p = spec.resolved()
        d = dispersion_check(params, float(p["k"]), int(p["n"]), float(p["cfl"]))
        dd = dispersion_check(params, float(p["k"]), int(p["n"]), float(p["cfl"]), damped=True)
        report.add("speed", abs(d.speed_ratio - 1), tol=tol.get("dispersion_speed", 0.01))
        report.add("decay", abs(dd.measured_decay / dd.predicted_decay - 1), tol=tol.get("dispersion_decay", 0.02))
        if "csv" in formats:
            path = out / "wave1d.csv"
            write_csv(path, ["quantity", "predicted", "measured"],
                      [("speed", d.predicted_speed, d.measured_speed),
                       ("damped_speed", dd.predicted_speed, dd.measured_speed),
                       ("decay_rate", dd.predicted_decay, dd.measured_decay)])
            written.append(path)
    else:
        n = int(config.get("grid.points", 33))
        dt = float(config.get("time.dt", 0.01))
        t_end = float(config.get("time.t_end", 0.5))
        snapshots = int(config.get("time.snapshots", 5))
        if n < 3:
            raise UsageError("grid.points must be at least 3")
        if dt <= 0 or t_end < 0:
            raise UsageError("time.dt must be positive and time.t_end non-negative")
        if snapshots < 1:
            raise UsageError("time.snapshots must be at least 1")
        steps = int(round(t_end / dt))
        state = spec.build(0.0)
        periodic = spec.name == "damped-wave"
        grid = Grid(state.dim, (n,) * state.dim, periodic=(periodic,) * state.dim)
        traj = integrate_transport(state, dt, steps, grid=grid, tol=None)
        report.add("transport.divergence", traj.max_divergence, tol=tol.get("transport", 1e-8))
        picks = sorted({int(round(k * steps / max(snapshots - 1, 1))) for k in range(snapshots)}) if steps else [0]
        if "csv" in formats:
            path = out / f"{spec.name}_fields.csv"
            header = ["t", *AXES[:state.dim], "field", "component", "value"]

            def rows():
                for k in picks:
                    s = traj.states[k]
                    T_tr, O_tr = traj.transported[k]
                    yield from field_rows(s.t, grid, {"e": s.e, "omega": s.omega, "J": s.J, "K": s.K,
                                                      "T": s.torsion, "Omega": s.curvature,
                                                      "T_transported": T_tr, "Omega_transported": O_tr})
            write_csv(path, header, rows())
            written.append(path)
        final = state.at(traj.states[-1].t)
        pts = sample_points(state.dim, 6)
        b1, b2 = bianchi_residuals(final)
        report.add_form("bianchi.torsion", b1, final.t, pts, tol.get("bianchi", 1e-10))
        report.add_form("bianchi.curvature", b2, final.t, pts, tol.get("bianchi", 1e-10))
        report.merge(el_residuals(final, params, induced_sources(final, params), points=pts,
                                  tol=tol.get("el", 1e-10)), "el.")
        for A in range(state.dim):
            report.merge(noether_translation_residual(final, params, A, points=pts,
                                                      tol=tol.get("noether", 1e-6)), f"noether.E{A}.")
            report.merge(phi_cancellation_check(final, params, A, points=pts,
                                                tol=tol.get("phi", 1e-6)), f"phi.E{A}.")

    if "json" in formats:
        rp = out / f"{spec.name}_report.json"
        rp.write_text(dumps(report.to_dict()), encoding="utf-8", newline="")
        written.append(rp)
        manifest = {
            "scenario": spec.name,
            "scenario_parameters": spec.resolved(),
            "material": {k: getattr(params, k) for k in sorted(MATERIAL_KEYS)},
            "config": {k: config[k] for k in sorted(config)},
            "versions": _versions(),
            "artifacts": {p.name: _sha256(p) for p in written},
            "passed": report.passed,
        }
        mp = out / f"{spec.name}_manifest.json"
        mp.write_text(dumps(manifest), encoding="utf-8", newline="")
    _print_report(spec.name, report)
    return 0 if report.passed else 1


def cmd_verify(config: dict, inject_sign_error: bool = False) -> int:
    only = config.get("verify.only")
    names = [s.strip() for s in str(only).split(",") if s.strip()] if only else None
    seed = int(config.get("run.seed", 0))
    tol = _tolerances(config)
    try:
        if inject_sign_error:
            with suite.inject_sign_error():
                reports = suite.run_families(names, seed, tol)
        else:
            reports = suite.run_families(names, seed, tol)
    except KeyError as exc:
        raise UsageError(str(exc).strip("'\"")) from exc
    verdict = {
        "seed": seed,
        "checks": {name: rep.to_dict() for name, rep in reports.items()},
        "passed": all(r.passed for r in reports.values()),
    }
    text = dumps(verdict)
    if "output.dir" in config:
        out = Path(config["output.dir"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "verify.json").write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)
    for name, rep in reports.items():
        _print_report(name, rep, sys.stderr)
    return 0 if verdict["passed"] else 1


DEFAULT_RESOLUTIONS = {"bianchi": (33, 65, 129), "noether": (32, 64, 128), "phi": (32, 64, 128),
                       "energy": (32, 64, 128), "dispersion": (32, 64, 128), "noether-analytic": (33, 65, 129)}


def cmd_convergence(config: dict, checks: list[str] | None = None, min_order: float = 1.8) -> int:
    checks = checks or [c for c in suite.CONVERGENCE_CHECKS]
    unknown = [c for c in checks if c not in suite.CONVERGENCE_CHECKS]
    if unknown:
        raise UsageError(f"unknown convergence check(s): {', '.join(unknown)}")
    grid = config.get("grid.points")
    seed = int(config.get("run.seed", 0))
    if grid is not None:
        res = tuple(int(v) for v in str(grid).split(","))
        if len(res) < 3 or any(b <= a for a, b in zip(res[:-1], res[1:])) or res[0] < 3:
            raise UsageError("convergence needs a strictly increasing list of >= 3 resolutions (each >= 3)")
    rows, failed = [], []
    for c in checks:
        r = suite.convergence_rows(c, res if grid is not None else DEFAULT_RESOLUTIONS[c], seed)
        rows.extend(r)
        last = r[-1][3]
        if last == "exact":
            if max(v for _, _, v, _ in r) > 1e-8:
                failed.append(c)
        elif last is None or last < min_order:
            failed.append(c)
    header = ["check", "resolution", "norm", "order"]
    shown = [(c, n, v, "n/a" if o is None else o) for c, n, v, o in rows]
    if "output.dir" in config:
        out = Path(config["output.dir"])
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / "convergence.csv", header, shown)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for row in shown:
            w.writerow([fmt(v) for v in row])
    for c in failed:
        print(f"[FAIL] convergence {c}: order below {min_order}", file=sys.stderr)
    return 1 if failed else 0


# --------------------------------------------------------------------------- #
# argument parsing
# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesocosserat", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", type=Path, help="flat dotted-key configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="set a configuration key (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="random seed for manufactured states")
    common.add_argument("--set", action="append", dest="set_local", default=argparse.SUPPRESS,
                        metavar="KEY=VALUE", help="set a configuration key (repeatable)")

    run = sub.add_parser("run", parents=[common], help="execute one scenario and write field dumps")
    run.add_argument("--scenario", help="scenario name")
    run.add_argument("--grid", type=int, help="grid points per axis")
    run.add_argument("--dt", type=float, help="time step")
    run.add_argument("--t-end", type=float, help="final time")
    run.add_argument("--snapshots", type=int, help="number of snapshots written to the field dump")
    run.add_argument("--format", help="comma list of csv,json")

    ver = sub.add_parser("verify", parents=[common], help="run the identity and property checks")
    ver.add_argument("--only", help="comma list of check families: " + ", ".join(suite.FAMILIES))
    ver.add_argument("--inject-sign-error", action="store_true", help=argparse.SUPPRESS)

    conv = sub.add_parser("convergence", parents=[common], help="grid refinement study")
    conv.add_argument("--check", action="append", help="check name (repeatable): " + ", ".join(suite.CONVERGENCE_CHECKS))
    conv.add_argument("--grid", help="comma list of resolutions, e.g. 33,65,129")
    conv.add_argument("--min-order", type=float, default=1.8)
    return parser


def _split_tol_flags(argv: list[str]) -> tuple[list[str], dict]:
    """Pull ``--tol.<key> VALUE`` / ``--tol.<key>=VALUE`` out of argv."""
    rest, tols = [], {}
    it = iter(range(len(argv)))
    skip = False
    for i in it:
        if skip:
            skip = False
            continue
        arg = argv[i]
        if arg.startswith("--tol."):
            key, eq, value = arg[6:].partition("=")
            if not eq:
                if i + 1 >= len(argv):
                    raise UsageError(f"{arg} needs a value")
                value, skip = argv[i + 1], True
            if key not in suite.DEFAULT_TOL:
                raise UsageError(f"unknown tolerance key {key!r}")
            try:
                tols[f"tol.{key}"] = float(value)
            except ValueError as exc:
                raise UsageError(f"tolerance {key} must be a number") from exc
            continue
        rest.append(arg)
    return rest, tols


def _config_from_args(args, tols: dict) -> dict:
    config: dict = {}
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        config.update(parse_config_text(text, str(args.config)))
    for item in args.set + getattr(args, "set_local", []):
        key, eq, value = item.partition("=")
        if not eq:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        _validate_key(key.strip(), "--set")
        config[key.strip()] = _coerce(value.strip())
    flag_map = {"out": "output.dir", "seed": "run.seed", "scenario": "scenario.name", "grid": "grid.points",
                "dt": "time.dt", "t_end": "time.t_end", "snapshots": "time.snapshots",
                "format": "output.format", "only": "verify.only"}
    for attr, key in flag_map.items():
        v = getattr(args, attr, None)
        if v is not None:
            config[key] = v
    config.update(tols)
    return config


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv, tols = _split_tol_flags(argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        config = _config_from_args(args, tols)
        if args.command == "run":
            return cmd_run(config)
        if args.command == "verify":
            return cmd_verify(config, args.inject_sign_error)
        return cmd_convergence(config, args.check, args.min_order)
    except UsageError as exc:
        print(f"mesocosserat: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
