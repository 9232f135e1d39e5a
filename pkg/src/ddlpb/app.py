"""Structure ingestion, run configuration, and batch commands.

The commands return plain dictionaries that serialize losslessly to
JSON; the CLI layer owns argument parsing and process exit codes.
"""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .cavity import Solute, SwitchParams, build_cavity
from .errors import ConfigurationError, ParseError
from .fmm import FarField
from .lebgrid import SUPPORTED_SIZES, lebedev
from .operators import OperatorContext, build_rhs
from .solver import (SolverConfig, adjoint_rhs, energy, solve_adjoint,
                     solve_primal)

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Settings of one batch run; defaults follow the production setup."""

    input_path: str = ""
    input_format: str = "pqr"          # pqr | xyzqr
    eps1: float = 1.0
    eps2: float = 78.54
    kappa: float = 0.104
    lmax: int = 6
    n_leb: int = 110
    tol: float = 1e-4
    eta: float = 0.1
    surface: str = "vdw"               # vdw | sas
    probe_radius: float = None         # None: 0 for vdw, 1.4 for sas
    fmm: bool = False
    pmax: int = None                   # None: equals lmax
    fmm_leaf_size: int = 8
    fmm_cache_budget: float = 4e8      # bytes of cached conversion operators
    mode: str = "incore"               # incore | onthefly
    deterministic: bool = False
    threads: int = 1
    strict_columns: bool = False

    def __post_init__(self):
        if self.lmax < 0:
            raise ConfigurationError("lmax must be >= 0")
        if self.n_leb not in SUPPORTED_SIZES:
            raise ConfigurationError(
                f"n_leb must be one of {list(SUPPORTED_SIZES)}")
        if self.input_format not in ("pqr", "xyzqr"):
            raise ConfigurationError("format must be 'pqr' or 'xyzqr'")
        if self.surface not in ("vdw", "sas"):
            raise ConfigurationError("surface must be 'vdw' or 'sas'")
        if self.mode not in ("incore", "onthefly"):
            raise ConfigurationError("mode must be 'incore' or 'onthefly'")
        if self.probe_radius is None:
            self.probe_radius = 1.4 if self.surface == "sas" else 0.0
        if self.pmax is None:
            self.pmax = self.lmax
        if self.fmm and self.pmax < 1:
            raise ConfigurationError("pmax must be >= 1 when fmm is on")

    def echo(self):
        d = dict(self.__dict__)
        d["schema_version"] = SCHEMA_VERSION
        return d


# ---------------------------------------------------------------------------
# structure parsing
# ---------------------------------------------------------------------------


def _finite_or_raise(values, path, lineno):
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ParseError("non-finite numeric field", path, lineno)
    return arr


def _parse_pqr(path, strict_columns=False):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            first = line.split(None, 1)
            if not first or first[0].upper() not in ("ATOM", "HETATM"):
                continue
            try:
                if strict_columns:
                    x = float(line[30:38])
                    y = float(line[38:46])
                    z = float(line[46:54])
                    q, r = (float(t) for t in line[54:].split()[:2])
                else:
                    toks = line.split()
                    # the trailing five numeric fields are x y z q r,
                    # whatever the chain/residue columns look like
                    x, y, z, q, r = (float(t) for t in toks[-5:])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"malformed record: {exc}", path, lineno) \
                    from None
            _finite_or_raise([x, y, z, q, r], path, lineno)
            if r <= 0.0:
                raise ParseError("non-positive radius", path, lineno)
            rows.append((x, y, z, q, r))
    if not rows:
        raise ParseError("no ATOM/HETATM records found", path)
    return np.asarray(rows)


def _parse_xyzqr(path):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            toks = body.split()
            if len(toks) != 5:
                raise ParseError(f"expected 5 fields, got {len(toks)}",
                                 path, lineno)
            try:
                vals = [float(t) for t in toks]
            except ValueError as exc:
                raise ParseError(f"malformed number: {exc}", path, lineno) \
                    from None
            _finite_or_raise(vals, path, lineno)
            if vals[4] <= 0.0:
                raise ParseError("non-positive radius", path, lineno)
            rows.append(vals)
    if not rows:
        raise ParseError("no atom lines found", path)
    return np.asarray(rows)


def parse_structure(path, fmt="pqr", strict_columns=False):
    """Read atoms (centers, charges, radii) from a PQR or XYZQR file."""
    if fmt == "pqr":
        data = _parse_pqr(path, strict_columns)
    elif fmt == "xyzqr":
        data = _parse_xyzqr(path)
    else:
        raise ConfigurationError(f"unknown format {fmt!r}")
    return data[:, :3], data[:, 3], data[:, 4]


def load_solute(config):
    centers, charges, radii = parse_structure(
        config.input_path, config.input_format, config.strict_columns)
    return Solute(centers, radii + config.probe_radius, charges,
                  eps1=config.eps1, eps2=config.eps2, kappa=config.kappa)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _apply_threads(config):
    import numba
    limit = max(1, min(config.threads, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(limit)


def _build_context(config, solute):
    _apply_threads(config)
    grid = lebedev(config.n_leb)
    cavity = build_cavity(solute, SwitchParams(config.eta), grid)
    farfield = None
    if config.fmm:
        farfield = FarField(pmax=config.pmax, leaf_size=config.fmm_leaf_size,
                            m2l_cache_budget=config.fmm_cache_budget)
    return OperatorContext(cavity, config.lmax, mode=config.mode,
                           farfield=farfield)


def _solver_config(config):
    return SolverConfig(tol=config.tol, deterministic=config.deterministic)


def _report(config, energy_kcal, forces, solver_stats, timings):
    if config.deterministic:
        timings = {k: 0.0 for k in timings}
    return {
        "schema_version": SCHEMA_VERSION,
        "energy_kcal_mol": energy_kcal,
        "forces": forces,
        "solver": solver_stats,
        "timings": timings,
        "config": config.echo(),
    }


def run_energy(config, solute=None):
    """Solve for the potentials and report the solvation energy."""
    solute = solute if solute is not None else load_solute(config)
    t0 = time.perf_counter()
    ctx = _build_context(config, solute)
    t1 = time.perf_counter()
    rhs = build_rhs(ctx)
    t2 = time.perf_counter()
    x, rep = solve_primal(ctx, rhs, _solver_config(config))
    t3 = time.perf_counter()
    stats = {"macro_iters": rep.macro_iterations,
             "micro_iters": rep.total_micro_iterations,
             "final_increment": rep.final_increment}
    timings = {"init": t1 - t0, "rhs": t2 - t1, "primal": t3 - t2,
               "adjoint": 0.0, "forces": 0.0}
    return _report(config, energy(x, solute), None, stats, timings)


def run_forces(config, solute=None):
    """Full pipeline: primal solve, adjoint solve, force contraction."""
    from .forces import assemble_forces
    solute = solute if solute is not None else load_solute(config)
    t0 = time.perf_counter()
    ctx = _build_context(config, solute)
    t1 = time.perf_counter()
    rhs = build_rhs(ctx)
    t2 = time.perf_counter()
    cfg = _solver_config(config)
    x, prim = solve_primal(ctx, rhs, cfg)
    t3 = time.perf_counter()
    xa, adj = solve_adjoint(ctx, adjoint_rhs(solute, ctx.nb), cfg)
    t4 = time.perf_counter()
    fs = assemble_forces(ctx, x, xa, prim, adj)
    t5 = time.perf_counter()
    stats = {"macro_iters": prim.macro_iterations + adj.macro_iterations,
             "micro_iters": (prim.total_micro_iterations
                             + adj.total_micro_iterations),
             "final_increment": max(prim.final_increment,
                                    adj.final_increment)}
    timings = {"init": t1 - t0, "rhs": t2 - t1, "primal": t3 - t2,
               "adjoint": t4 - t3, "forces": t5 - t4}
    return _report(config, energy(x, solute), fs.forces.tolist(), stats,
                   timings)


def run_gradcheck(config, h_values, solute=None, central=False):
    """Finite-difference validation table for the analytic gradients."""
    from .forces import fd_check
    if not h_values:
        raise ConfigurationError("at least one step size is required")
    solute = solute if solute is not None else load_solute(config)
    farfield_factory = None
    if config.fmm:
        def farfield_factory(_s):
            return FarField(pmax=config.pmax,
                            leaf_size=config.fmm_leaf_size)
    rep = fd_check(solute, _solver_config(config), h_values,
                   lmax=config.lmax, n_leb=config.n_leb, eta=config.eta,
                   mode=config.mode, central=central,
                   farfield_factory=farfield_factory)
    plateau = [r["h"] for r in rep["rows"] if r["h"] < 1e-5]
    return {
        "schema_version": SCHEMA_VERSION,
        "rows": rep["rows"],
        "slope": rep["slope"],
        "plateau_suspect": bool(plateau),
        "energy_kcal_mol": rep["energy"],
        "config": config.echo(),
    }


def exponential_fit(xs, ys):
    """Fit y = a + b exp(c x); returns (a, b, c, r_squared) or None."""
    from scipy.optimize import curve_fit
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    spread = np.max(np.abs(ys - ys[-1]))
    if spread < 1e-12 * max(1.0, abs(ys[-1])):
        return float(ys[-1]), 0.0, 0.0, 1.0
    # seed the decay rate from the increment ratio
    c0 = -0.5
    incs = np.abs(np.diff(ys))
    good = incs > 0
    if good.sum() >= 2:
        steps = np.diff(xs)
        rates = np.log(incs[1:] / incs[:-1]) / steps[1:]
        c0 = float(np.clip(np.median(rates), -5.0, -1e-3))
    b0 = (ys[0] - ys[-1]) / (np.exp(c0 * xs[0]) - np.exp(c0 * xs[-1]))
    a0 = ys[-1] - b0 * np.exp(c0 * xs[-1])

    def model(x, a, b, c):
        return a + b * np.exp(c * x)

    try:
        popt, _ = curve_fit(model, xs, ys, p0=[a0, b0, c0], maxfev=20000)
    except Exception:
        return None
    resid = ys - model(xs, *popt)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(popt[0]), float(popt[1]), float(popt[2]), r2


def run_sweep(config, lmax_values=None, pmax_values=None, solute=None,
              forces=False):
    """Discretization sweep with an exponential convergence fit.

    Exactly one of ``lmax_values``/``pmax_values`` must be given; the
    energy is tabulated against it and extrapolated to the infinite
    limit through ``a + b exp(c x)``.
    """
    if (lmax_values is None) == (pmax_values is None):
        raise ConfigurationError("provide either lmax values or pmax values")
    values = lmax_values if lmax_values is not None else pmax_values
    values = [int(v) for v in values]
    if len(values) < 3:
        raise ConfigurationError("a sweep needs at least 3 points to fit")
    solute = solute if solute is not None else load_solute(config)
    rows = []
    for v in values:
        cfg = RunConfig(**{**config.__dict__})
        if lmax_values is not None:
            cfg.lmax = v
            cfg.pmax = max(config.pmax, v) if config.fmm else v
        else:
            cfg.fmm = True
            cfg.pmax = v
        runner = run_forces if forces else run_energy
        rep = runner(cfg, solute=solute)
        row = {"value": v, "energy_kcal_mol": rep["energy_kcal_mol"]}
        if forces:
            row["forces"] = rep["forces"]
        rows.append(row)
    xs = [r["value"] for r in rows]
    ys = [r["energy_kcal_mol"] for r in rows]
    fit = exponential_fit(xs, ys)
    out = {
        "schema_version": SCHEMA_VERSION,
        "parameter": "lmax" if lmax_values is not None else "pmax",
        "rows": rows,
        "config": config.echo(),
    }
    if fit is None:
        out["fit"] = None
        out["warning"] = "exponential fit did not converge; raw table only"
    else:
        a, b, c, r2 = fit
        out["fit"] = {"extrapolated": a, "amplitude": b, "rate": c,
                      "r_squared": r2}
        out["relative_errors"] = [
            abs(y - a) / abs(a) if a != 0 else float("nan") for y in ys]
    return out


def report_to_json(report):
    """Canonical serialization: identical runs give identical bytes."""
    return json.dumps(report, sort_keys=True, separators=(",", ":"),
                      allow_nan=True)


def sweep_to_csv(report):
    lines = [f"{report['parameter']},energy_kcal_mol"]
    for row in report["rows"]:
        lines.append(f"{row['value']},{row['energy_kcal_mol']!r}")
    return "\n".join(lines) + "\n"
