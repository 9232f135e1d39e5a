"""Command-line interface.

Exit codes: 0 success, 1 usage or parse error, 2 convergence failure.
The machine-readable JSON report goes to --output or stdout; a short
human-readable summary goes to stderr.
"""

import argparse
import sys

from .app import (RunConfig, report_to_json, run_energy, run_forces,
                  run_gradcheck, run_sweep, sweep_to_csv)
from .errors import ConfigurationError, ConvergenceError, DdlpbError, ParseError
from .solver import kappa_from_ionic_strength


def _add_common(p):
    p.add_argument("--input", required=True, help="structure file")
    p.add_argument("--format", choices=["pqr", "xyzqr"], default=None)
    p.add_argument("--config", help="key=value config file", default=None)
    p.add_argument("--lmax", type=int, default=None)
    p.add_argument("--nleb", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--eps1", type=float, default=None)
    p.add_argument("--eps2", type=float, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--ionic-strength", type=float, default=None,
                   help="mol/L; used with --temperature when --kappa absent")
    p.add_argument("--temperature", type=float, default=298.15)
    p.add_argument("--surface", choices=["vdw", "sas"], default=None)
    p.add_argument("--probe", type=float, default=None,
                   help="probe radius added to every input radius")
    p.add_argument("--fmm", choices=["on", "off"], default=None)
    p.add_argument("--pmax", type=int, default=None)
    p.add_argument("--fmm-leaf-size", type=int, default=None)
    p.add_argument("--mode", choices=["incore", "onthefly"], default=None)
    p.add_argument("--deterministic", action="store_true", default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--strict-columns", action="store_true", default=None)
    p.add_argument("--output", help="write the JSON report here", default=None)


def _read_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigurationError(
                    f"malformed config line {lineno}: {body!r}")
            key, val = (s.strip() for s in body.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


_CONFIG_TYPES = {
    "input_format": str, "surface": str, "mode": str,
    "lmax": int, "n_leb": int, "pmax": int, "fmm_leaf_size": int,
    "threads": int,
    "eps1": float, "eps2": float, "kappa": float, "tol": float,
    "eta": float, "probe_radius": float,
    "fmm": lambda s: s.lower() in ("on", "true", "1", "yes"),
    "deterministic": lambda s: s.lower() in ("on", "true", "1", "yes"),
    "strict_columns": lambda s: s.lower() in ("on", "true", "1", "yes"),
}

_ALIAS = {"format": "input_format", "nleb": "n_leb", "probe": "probe_radius"}


def build_config(args):
    settings = {}
    if args.config:
        for key, val in _read_config_file(args.config).items():
            key = _ALIAS.get(key, key)
            if key not in _CONFIG_TYPES:
                raise ConfigurationError(f"unknown config key {key!r}")
            settings[key] = _CONFIG_TYPES[key](val)
    cli_map = {
        "input_format": args.format, "lmax": args.lmax, "n_leb": args.nleb,
        "tol": args.tol, "eta": args.eta, "eps1": args.eps1,
        "eps2": args.eps2, "kappa": args.kappa, "surface": args.surface,
        "probe_radius": args.probe,
        "fmm": None if args.fmm is None else args.fmm == "on",
        "pmax": args.pmax, "fmm_leaf_size": args.fmm_leaf_size,
        "mode": args.mode, "deterministic": args.deterministic,
        "threads": args.threads, "strict_columns": args.strict_columns,
    }
    for key, val in cli_map.items():
        if val is not None:
            settings[key] = val
    if "kappa" not in settings and args.ionic_strength is not None:
        eps2 = settings.get("eps2", 78.54)
        settings["kappa"] = kappa_from_ionic_strength(
            args.ionic_strength, args.temperature, eps2)
    settings["input_path"] = args.input
    return RunConfig(**settings)


def _emit(report, args, summary_lines):
    text = report_to_json(report)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for line in summary_lines:
        print(line, file=sys.stderr)


def _summary(report):
    lines = []
    if report.get("energy_kcal_mol") is not None:
        lines.append(f"energy: {report['energy_kcal_mol']:.6f} kcal/mol")
    solver = report.get("solver")
    if solver:
        lines.append(f"solver: {solver['macro_iters']} macro / "
                     f"{solver['micro_iters']} micro iterations, "
                     f"final increment {solver['final_increment']:.2e}")
    timings = report.get("timings")
    if timings:
        total = sum(timings.values())
        lines.append("timings [s]: " + ", ".join(
            f"{k} {v:.3f}" for k, v in timings.items()) +
            f" (total {total:.3f})")
    return lines


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ddlpb",
        description="Electrostatic solvation energies and analytical "
                    "forces for charged sphere unions in ionic solvent")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, hlp in (("energy", "solvation energy only"),
                      ("forces", "energy plus analytical forces")):
        p = sub.add_parser(name, help=hlp)
        _add_common(p)

    p = sub.add_parser("gradcheck", help="finite-difference force validation")
    _add_common(p)
    p.add_argument("--steps", default="1e-2,1e-3,1e-4",
                   help="comma-separated step sizes in Angstrom")
    p.add_argument("--central", action="store_true")

    p = sub.add_parser("sweep", help="discretization convergence sweep")
    _add_common(p)
    p.add_argument("--lmax-list", default=None,
                   help="comma-separated degrees to sweep")
    p.add_argument("--pmax-list", default=None,
                   help="comma-separated expansion orders to sweep")
    p.add_argument("--csv", default=None, help="also write the table as CSV")
    p.add_argument("--with-forces", action="store_true")

    args = parser.parse_args(argv)
    try:
        config = build_config(args)
        if args.command == "energy":
            report = run_energy(config)
            _emit(report, args, _summary(report))
        elif args.command == "forces":
            report = run_forces(config)
            _emit(report, args, _summary(report))
        elif args.command == "gradcheck":
            try:
                steps = [float(t) for t in args.steps.split(",") if t.strip()]
            except ValueError as exc:
                raise ConfigurationError(f"bad --steps: {exc}") from None
            report = run_gradcheck(config, steps, central=args.central)
            lines = [f"h={r['h']:g}: max {r['max_diff']:.3e} "
                     f"rmsd {r['rmsd']:.3e}" for r in report["rows"]]
            lines.append(f"log-log slope: {report['slope']:.3f}")
            if report["plateau_suspect"]:
                lines.append("note: steps below 1e-5 may sit on the "
                             "solver-precision plateau")
            _emit(report, args, lines)
        elif args.command == "sweep":
            lv = [int(t) for t in args.lmax_list.split(",")] \
                if args.lmax_list else None
            pv = [int(t) for t in args.pmax_list.split(",")] \
                if args.pmax_list else None
            report = run_sweep(config, lmax_values=lv, pmax_values=pv,
                               forces=args.with_forces)
            lines = [f"{report['parameter']}={r['value']}: "
                     f"{r['energy_kcal_mol']:.8f} kcal/mol"
                     for r in report["rows"]]
            if report.get("fit"):
                lines.append(f"extrapolated: "
                             f"{report['fit']['extrapolated']:.8f} kcal/mol "
                             f"(R^2 {report['fit']['r_squared']:.4f})")
            if report.get("warning"):
                lines.append(report["warning"])
            _emit(report, args, lines)
            if args.csv:
                with open(args.csv, "w") as fh:
                    fh.write(sweep_to_csv(report))
    except (ConfigurationError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 2
    except DdlpbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
