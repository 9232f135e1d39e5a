"""Iterative solution of the coupled system and its adjoint.

Both the outer coupled iteration and the inner sparse-block solves use
the same machinery: a fixed-point map accelerated by Pulay mixing
(direct inversion in the iterative subspace).  The outer map applies
the block preconditioner (the two sparse solves) to the residual of the
full system; the inner solves are warm-started from the previous outer
pass.  Iterations stop on the relative infinity-norm increment of the
solution.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .operators import (apply_coupling, apply_coupling_adjoint,
                        apply_laplace_block, apply_laplace_block_adjoint,
                        apply_screened_block, apply_screened_block_adjoint)
from .state import StateVector

# kcal/mol per e^2/Angstrom
COULOMB_KCAL = 332.0637133

Y00 = 1.0 / (2.0 * np.sqrt(np.pi))


@dataclass
class SolverConfig:
    tol: float = 1e-4
    max_macro: int = 200
    max_micro: int = 400
    diis_depth: int = 25
    deterministic: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_macro < 1 or self.max_micro < 1:
            raise ValueError("iteration caps must be >= 1")

    @property
    def inner_tol(self):
        return self.tol / 100.0


@dataclass
class SolveReport:
    macro_iterations: int = 0
    total_micro_iterations: int = 0
    final_increment: float = np.inf
    wall_time: float = 0.0
    converged: bool = False


class _Diis:
    """Pulay mixing over a bounded history of (candidate, residual) pairs."""

    def __init__(self, depth):
        self.depth = depth
        self.xs = []
        self.rs = []

    def push(self, x, r):
        self.xs.append(x)
        self.rs.append(r)
        if len(self.xs) > self.depth:
            self.xs.pop(0)
            self.rs.pop(0)

    def extrapolate(self):
        """Best linear combination of the stored candidates.

        The constrained least-squares (normal-equations) system is
        solved with the residual Gram matrix scaled symmetrically by
        the residual norms; without that scaling the system's condition
        number grows like the squared norm ratio and the extrapolation
        stalls once the history spans many orders of magnitude.
        """
        while True:
            n = len(self.xs)
            if n == 1:
                return self.xs[0]
            snorm = np.array([np.linalg.norm(r) for r in self.rs])
            if np.any(snorm == 0.0):
                return self.xs[int(np.argmin(snorm))]
            b = np.empty((n + 1, n + 1))
            for i in range(n):
                for j in range(i, n):
                    b[i, j] = b[j, i] = (np.dot(self.rs[i], self.rs[j])
                                         / (snorm[i] * snorm[j]))
            b[:n, n] = 1.0 / snorm
            b[n, :n] = 1.0 / snorm
            b[n, n] = 0.0
            # Tikhonov guard against a rank-deficient history
            b[:n, :n] += 1e-14 * np.eye(n)
            rhs = np.zeros(n + 1)
            rhs[n] = 1.0
            try:
                coeff = np.linalg.solve(b, rhs)[:n] / snorm
            except np.linalg.LinAlgError:
                coeff = None
            if coeff is not None and np.all(np.isfinite(coeff)):
                out = coeff[0] * self.xs[0]
                for i in range(1, n):
                    out += coeff[i] * self.xs[i]
                return out
            # breakdown: drop the older half of the history and retry
            keep = max(1, n // 2)
            self.xs = self.xs[-keep:]
            self.rs = self.rs[-keep:]


def _fixed_point_solve(apply_map, rhs_flat, x0, tol, max_iter, depth, label):
    """Solve x = rhs - K x via DIIS on the map x <- rhs - K x.

    ``apply_map(x)`` must return K x (the non-identity part).
    Returns (solution, iterations, final_increment).
    """
    scale = np.max(np.abs(rhs_flat))
    if scale == 0.0:
        return np.zeros_like(rhs_flat), 0, 0.0
    x = x0.copy()
    diis = _Diis(depth)
    for it in range(1, max_iter + 1):
        x_new = rhs_flat - apply_map(x)
        resid = x_new - x
        inc = np.max(np.abs(resid))
        nrm = np.max(np.abs(x_new))
        rel = inc / nrm if nrm > 0 else 0.0
        if rel <= tol:
            return x_new, it, rel
        diis.push(x_new, resid)
        x = diis.extrapolate()
    raise ConvergenceError(
        f"{label} solve exceeded {max_iter} iterations (last increment {rel:.3e})",
        report=SolveReport(macro_iterations=max_iter, final_increment=rel))


class _Workspace:
    """Warm-start storage for the two sparse-block solves."""

    def __init__(self, shape):
        self.guess_a = np.zeros(shape)
        self.guess_b = np.zeros(shape)
        self.micro = 0


def _precondition(ctx, residual, cfg, ws, adjoint):
    """Approximately apply the inverse of the sparse block-diagonal part."""
    if adjoint:
        fa = apply_laplace_block_adjoint
        fb = apply_screened_block_adjoint
    else:
        fa = apply_laplace_block
        fb = apply_screened_block
    shape = residual.reaction.shape

    def make_map(f):
        def apply_map(xf):
            x = xf.reshape(shape)
            return (f(ctx, x) - x).ravel()
        return apply_map

    xa, ita, _ = _fixed_point_solve(
        make_map(fa), residual.reaction.ravel(), ws.guess_a.ravel(),
        cfg.inner_tol, cfg.max_micro, cfg.diis_depth, "sparse-block")
    xb, itb, _ = _fixed_point_solve(
        make_map(fb), residual.extension.ravel(), ws.guess_b.ravel(),
        cfg.inner_tol, cfg.max_micro, cfg.diis_depth, "sparse-block")
    ws.micro += ita + itb
    ws.guess_a = xa.reshape(shape)
    ws.guess_b = xb.reshape(shape)
    return StateVector(ws.guess_a.copy(), ws.guess_b.copy())


def precond_apply(ctx, residual, cfg=None, adjoint=False):
    """One application of the block preconditioner (fresh workspace)."""
    cfg = cfg or SolverConfig()
    ws = _Workspace(residual.reaction.shape)
    return _precondition(ctx, residual, cfg, ws, adjoint)


def _solve_coupled(ctx, rhs, cfg, adjoint):
    t0 = time.perf_counter()
    m, nb = rhs.reaction.shape
    ws = _Workspace((m, nb))
    report = SolveReport()
    scale = rhs.norm_inf()
    if scale == 0.0:
        report.converged = True
        report.final_increment = 0.0
        report.wall_time = time.perf_counter() - t0
        return StateVector.zeros(m, nb), report

    if adjoint:
        def coupling(x):
            c1t, c2t = apply_coupling_adjoint(ctx, x.reaction + x.extension)
            return StateVector(c1t, c2t)
    else:
        def coupling(x):
            c = apply_coupling(ctx, x.reaction, x.extension)
            return StateVector(c, c.copy())

    # initial iterate: preconditioned right-hand side (not counted)
    x = _precondition(ctx, rhs, cfg, ws, adjoint)
    diis = _Diis(cfg.diis_depth)
    rel = np.inf
    for it in range(1, cfg.max_macro + 1):
        resid_rhs = rhs - coupling(x)
        x_new = _precondition(ctx, resid_rhs, cfg, ws, adjoint)
        delta = x_new - x
        inc = delta.norm_inf()
        nrm = x_new.norm_inf()
        rel = inc / nrm if nrm > 0 else 0.0
        report.macro_iterations = it
        if rel <= cfg.tol:
            x = x_new
            break
        diis.push(x_new.flat(), delta.flat())
        x = StateVector.from_flat(diis.extrapolate(), m, nb)
    else:
        report.total_micro_iterations = ws.micro
        report.final_increment = rel
        report.wall_time = time.perf_counter() - t0
        raise ConvergenceError(
            f"coupled solve exceeded {cfg.max_macro} macro-iterations "
            f"(last increment {rel:.3e})", report=report)
    report.total_micro_iterations = ws.micro
    report.final_increment = rel
    report.converged = True
    report.wall_time = time.perf_counter() - t0
    return x, report


def solve_primal(ctx, rhs, cfg=None):
    """Solve the coupled system for the two potentials."""
    cfg = cfg or SolverConfig()
    return _solve_coupled(ctx, rhs, cfg, adjoint=False)


def solve_adjoint(ctx, rhs, cfg=None):
    """Solve the transposed system (one solve serves every force)."""
    cfg = cfg or SolverConfig()
    return _solve_coupled(ctx, rhs, cfg, adjoint=True)


def adjoint_rhs(solute, nbasis):
    """Right-hand side whose solution turns gradients into contractions.

    The energy is a fixed linear functional of the solution; this is its
    coefficient vector (charge times the constant-harmonic value on the
    reaction block).
    """
    m = solute.n_spheres
    q = StateVector.zeros(m, nbasis)
    q.reaction[:, 0] = solute.charges * Y00
    return q


def energy(x, solute, unit="kcal/mol"):
    """Electrostatic solvation energy of a solved state.

    Computed as half the charge-weighted reaction potential at the
    sphere centers; only the constant harmonic survives there.
    """
    e_au = 0.5 * float(np.dot(solute.charges, x.reaction[:, 0])) * Y00
    if unit == "kcal/mol":
        return e_au * COULOMB_KCAL
    if unit == "au":
        return e_au
    raise ValueError(f"unknown unit {unit!r}")


def solvation_energy(ctx, cfg=None):
    """Convenience wrapper: assemble the right-hand side, solve, report."""
    from .operators import build_rhs
    rhs = build_rhs(ctx)
    x, report = solve_primal(ctx, rhs, cfg)
    return energy(x, ctx.solute), x, report


def kappa_from_ionic_strength(ionic_strength_molar, temperature_k=298.15,
                              eps_solvent=78.54):
    """Debye screening constant in 1/Angstrom from ionic strength (mol/L).

    Uses CODATA constants; 0.1 M at 298.15 K in water (eps 78.54) gives
    approximately 0.104 1/Angstrom.
    """
    from scipy.constants import Avogadro, Boltzmann, elementary_charge, epsilon_0
    num = 2.0 * Avogadro * elementary_charge ** 2 * ionic_strength_molar * 1e3
    den = epsilon_0 * eps_solvent * Boltzmann * temperature_k
    return float(np.sqrt(num / den) * 1e-10)
