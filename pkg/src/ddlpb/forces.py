"""Analytical energy gradients via the adjoint contraction.

One adjoint solve turns the derivative of the energy with respect to
every atomic center into cheap contractions: the derivative of the
system matrix and right-hand side against the primal and adjoint
solutions.  The families are organized per quadrature point so each
point's special-function evaluations are shared across the atoms it
touches, keeping the sparse parts linear in the atom count.
"""

from dataclasses import dataclass

import numpy as np

from . import _forcekernels
from .errors import ConfigurationError, ConvergenceError, DomainError
from .operators import (coupling_source, flux_moments,
                        flux_outgoing_coefficients, outgoing_coefficients,
                        vacuum_normal_derivative, vacuum_potential_on_points)
from .solver import COULOMB_KCAL

__all__ = ["ForceSet", "contract_sparse_blocks", "contract_coupling",
           "contract_rhs", "assemble_forces", "fd_check"]


@dataclass
class ForceSet:
    """Energy gradients per atom (kcal/mol/Angstrom); forces negate them."""

    gradients: np.ndarray

    @property
    def forces(self):
        return -self.gradients


def _require_smooth_switching(ctx):
    if ctx.cavity.sw.eta <= 0.0:
        raise ConfigurationError(
            "force evaluation requires a positive switching width eta; "
            "with eta = 0 the exposure weights are not differentiable")


def _adjoint_syntheses(ctx, x_adj):
    za = x_adj.reaction @ ctx.ygrid.T
    zb = x_adj.extension @ ctx.ygrid.T
    return za, zb


def contract_sparse_blocks(ctx, x, x_adj):
    """<grad_k of the two sparse blocks applied to x, adjoint> per atom."""
    _require_smooth_switching(ctx)
    cav = ctx.cavity
    za_syn, zb_syn = _adjoint_syntheses(ctx, x_adj)
    grad = np.zeros((ctx.n_spheres, 3))
    _forcekernels.dab_contract(
        ctx.lmax, ctx.kappa, ctx.centers, ctx.radii, cav.points,
        cav.nbr_ptr, cav.nbr_idx, cav.pair_dist, cav.pair_chi,
        cav.pair_chi_prime, cav.f, cav.d, cav.zvec, ctx.ihat_r, ctx.norms,
        ctx.lebw, za_syn, zb_syn,
        np.ascontiguousarray(x.reaction), np.ascontiguousarray(x.extension),
        grad)
    # the sparse blocks carry a global minus sign on their coupling part
    return -grad


def _exposure_contract(ctx, values, grad):
    cav = ctx.cavity
    _forcekernels.exposure_gradient_contract(
        ctx.centers, ctx.radii, cav.points, cav.nbr_ptr, cav.nbr_idx,
        cav.pair_dist, cav.pair_chi_prime, cav.f, cav.zvec,
        np.ascontiguousarray(values), grad)


def contract_coupling(ctx, x, x_adj):
    """<grad_k of the dense coupling applied to x, adjoint> per atom.

    Product rule: the exposure factor moves (exposure-gradient term),
    the outgoing kernels move (field-gradient pair terms), and the
    per-sphere exposure projections move (second exposure term through
    the transposed accumulation).
    """
    _require_smooth_switching(ctx)
    cav = ctx.cavity
    m, nleb = ctx.n_spheres, ctx.n_leb
    za_syn, zb_syn = _adjoint_syntheses(ctx, x_adj)
    zc_syn = za_syn + zb_syn
    w_chi = ctx.lebw[None, :] * cav.chi
    weights = (w_chi * zc_syn).reshape(-1)

    v = coupling_source(ctx, x.reaction, x.extension)
    coeffs = outgoing_coefficients(ctx, x.reaction, x.extension)
    phi, gphi = ctx.sums.eval_with_gradient(coeffs)
    acc, gacc = ctx.sums.accumulate_with_gradient(weights)

    grad = np.zeros((m, 3))
    # exposure factor at the target points
    _exposure_contract(ctx, ctx.lebw[None, :] * zc_syn * phi.reshape(m, nleb),
                       grad)
    # outgoing-kernel motion: target-point side and source-center side
    grad += np.einsum("mn,mnk->mk", (w_chi * zc_syn),
                      gphi.reshape(m, nleb, 3))
    grad += np.einsum("ja,jak->jk", coeffs, gacc)
    # exposure projections of the source spheres
    dsyn = (ctx.layer_coupling[:, ctx.degrees] * acc) @ ctx.ygrid.T
    vsyn = v @ ctx.ygrid.T
    _exposure_contract(ctx, ctx.lebw[None, :] * vsyn * dsyn, grad)
    return grad


def contract_rhs(ctx, x_adj):
    """<grad_k of the right-hand side, adjoint> per atom."""
    _require_smooth_switching(ctx)
    cav = ctx.cavity
    m, nleb = ctx.n_spheres, ctx.n_leb
    solute = ctx.solute
    za_syn, zb_syn = _adjoint_syntheses(ctx, x_adj)
    zc_syn = za_syn + zb_syn
    w_chi = ctx.lebw[None, :] * cav.chi
    grad = np.zeros((m, 3))

    # vacuum-potential block (pairs with the reaction-side adjoint)
    psi0 = vacuum_potential_on_points(ctx)
    _exposure_contract(ctx, -ctx.lebw[None, :] * za_syn * psi0, grad)
    owner = np.repeat(np.arange(m, dtype=np.int64), nleb)
    _forcekernels.coulomb_field_contract(
        ctx.pointsf, ctx.eval_mask, (w_chi * za_syn).reshape(-1), owner,
        ctx.centers, solute.charges, solute.eps1, grad)

    # vacuum-flux block (pairs with the summed adjoint)
    eps_ratio = solute.eps1 / solute.eps2
    moments = flux_moments(ctx)
    coeffs = flux_outgoing_coefficients(ctx, moments)
    sval, gsval = ctx.sums.eval_with_gradient(coeffs)
    weights = -eps_ratio * (w_chi * zc_syn).reshape(-1)
    acc, gacc = ctx.sums.accumulate_with_gradient(weights)

    _exposure_contract(
        ctx, -eps_ratio * ctx.lebw[None, :] * zc_syn * sval.reshape(m, nleb),
        grad)
    grad += np.einsum("mn,mnk->mk",
                      -eps_ratio * (w_chi * zc_syn),
                      gsval.reshape(m, nleb, 3))
    grad += np.einsum("ja,jak->jk", coeffs, gacc)

    dpn = vacuum_normal_derivative(ctx)
    dsyn = (ctx.layer_coupling[:, ctx.degrees] * acc) @ ctx.ygrid.T
    _exposure_contract(ctx, ctx.lebw[None, :] * dsyn * dpn, grad)
    _forcekernels.coulomb_hessian_contract(
        cav.points, ctx.eval_mask, w_chi * dsyn,
        np.ascontiguousarray(cav.grid.directions),
        ctx.centers, solute.charges, solute.eps1, grad)
    return grad


def assemble_forces(ctx, x, x_adj, primal_report=None, adjoint_report=None):
    """Energy gradients for every atom from the two solved states.

    The adjoint solution is contracted once against all derivative
    families; adding atoms to the request costs nothing beyond the
    contraction itself.
    """
    for rep, name in ((primal_report, "primal"), (adjoint_report, "adjoint")):
        if rep is not None and not rep.converged:
            raise ConvergenceError(f"{name} solve did not converge; refusing "
                                   "to assemble forces", report=rep)
    d_rhs = contract_rhs(ctx, x_adj)
    d_ab = contract_sparse_blocks(ctx, x, x_adj)
    d_c = contract_coupling(ctx, x, x_adj)
    grad = 0.5 * (d_rhs - d_ab - d_c) * COULOMB_KCAL
    return ForceSet(grad)


def fd_check(solute, cfg, h_values, lmax=2, n_leb=110, eta=0.1,
             mode="incore", coords=None, central=False, seed=0,
             farfield_factory=None):
    """Finite-difference validation of the analytical gradients.

    Recomputes the energy at displaced geometries (rebuilding the cavity
    each time) and compares the difference quotients against the
    analytic gradient, for each step size in ``h_values``.

    Parameters
    ----------
    coords : optional list of (atom, axis) pairs; defaults to all
        coordinates for small systems, or a seeded random subset of 12.
    central : use central differences (second order) instead of the
        forward form.

    Returns
    -------
    dict with per-h max and RMS deviations plus the log-log slope of
    the RMS curve.
    """
    from .cavity import SwitchParams, build_cavity
    from .lebgrid import lebedev
    from .operators import OperatorContext, build_rhs
    from .solver import adjoint_rhs, energy, solve_adjoint, solve_primal

    h_values = list(h_values)
    if not h_values:
        raise DomainError("at least one step size is required")
    if any(h <= 0 or h > 0.1 for h in h_values):
        raise DomainError("step sizes must lie in (0, 0.1]")

    grid = lebedev(n_leb)
    sw = SwitchParams(eta)

    def make_ctx(s):
        ff = farfield_factory(s) if farfield_factory is not None else None
        return OperatorContext(build_cavity(s, sw, grid), lmax, mode=mode,
                               farfield=ff)

    def energy_of(s):
        ctx = make_ctx(s)
        xx, _ = solve_primal(ctx, build_rhs(ctx), cfg)
        return energy(xx, s)

    ctx0 = make_ctx(solute)
    rhs = build_rhs(ctx0)
    x, prim = solve_primal(ctx0, rhs, cfg)
    xa, adj = solve_adjoint(ctx0, adjoint_rhs(solute, ctx0.nb), cfg)
    grads = assemble_forces(ctx0, x, xa, prim, adj).gradients
    e0 = energy(x, solute)

    m = solute.n_spheres
    if coords is None:
        all_coords = [(k, a) for k in range(m) for a in range(3)]
        if len(all_coords) > 12:
            rng = np.random.default_rng(seed)
            idx = rng.choice(len(all_coords), size=12, replace=False)
            coords = [all_coords[i] for i in sorted(idx)]
        else:
            coords = all_coords

    rows = []
    for h in h_values:
        errs = []
        for (k, a) in coords:
            delta = np.zeros(3)
            delta[a] = h
            ep = energy_of(solute.displaced(k, delta))
            if central:
                em = energy_of(solute.displaced(k, -delta))
                quotient = (ep - em) / (2 * h)
            else:
                quotient = (ep - e0) / h
            errs.append(quotient - grads[k, a])
        errs = np.asarray(errs)
        rows.append({"h": h, "max_diff": float(np.max(np.abs(errs))),
                     "rmsd": float(np.sqrt(np.mean(errs ** 2)))})
    hs = np.array([r["h"] for r in rows])
    rms = np.array([r["rmsd"] for r in rows])
    slope = float(np.polyfit(np.log(hs), np.log(rms + 1e-300), 1)[0]) \
        if len(rows) > 1 else float("nan")
    return {"rows": rows, "slope": slope, "coords": coords,
            "energy": e0, "gradients": grads}
