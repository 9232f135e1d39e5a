"""Iterative solver: preconditioner contract, convergence, energies."""

import numpy as np
import pytest

from ddlpb.cavity import Solute, SwitchParams, build_cavity
from ddlpb.errors import ConvergenceError
from ddlpb.lebgrid import lebedev
from ddlpb.operators import (OperatorContext, apply_laplace_block, apply_system,
                             apply_system_adjoint, build_rhs)
from ddlpb.solver import (COULOMB_KCAL, SolverConfig, adjoint_rhs, energy,
                          kappa_from_ionic_strength, precond_apply,
                          solvation_energy, solve_adjoint, solve_primal)
from ddlpb.state import StateVector

RNG = np.random.default_rng(77)


def cluster(m, seed=0, spread=None, rmin=1.2, rmax=2.2):
    rng = np.random.default_rng(seed)
    spread = spread if spread is not None else 1.2 * m ** (1 / 3)
    return Solute(rng.uniform(-spread, spread, (m, 3)),
                  rng.uniform(rmin, rmax, m), rng.uniform(-1, 1, m))


def make_ctx(solute, lmax=4, nleb=110, eta=0.1, mode="incore"):
    cav = build_cavity(solute, SwitchParams(eta), lebedev(nleb))
    return OperatorContext(cav, lmax, mode=mode)


def born_energy_kcal(q, r, eps1, eps2, kappa):
    return COULOMB_KCAL * 0.5 * q * q * (
        1.0 / (eps2 * (1.0 + kappa * r) * r) - 1.0 / (eps1 * r))


# ---------------------------------------------------------------------------
# preconditioner
# ---------------------------------------------------------------------------

def test_precond_exact_for_single_sphere():
    s = Solute(np.zeros((1, 3)), np.array([2.0]), np.array([1.0]))
    ctx = make_ctx(s)
    r = StateVector(RNG.normal(size=(1, ctx.nb)), RNG.normal(size=(1, ctx.nb)))
    out = precond_apply(ctx, r)
    assert np.allclose(out.reaction, r.reaction, atol=1e-14)
    assert np.allclose(out.extension, r.extension, atol=1e-14)


def test_precond_zero_residual():
    ctx = make_ctx(cluster(4, seed=1))
    out = precond_apply(ctx, StateVector.zeros(4, ctx.nb))
    assert out.norm_inf() == 0.0


def test_precond_solve_contract():
    solute = cluster(30, seed=2)
    ctx = make_ctx(solute, lmax=3)
    cfg = SolverConfig(tol=1e-5)
    b = StateVector(RNG.normal(size=(30, ctx.nb)), RNG.normal(size=(30, ctx.nb)))
    x = precond_apply(ctx, b, cfg)
    resid = apply_laplace_block(ctx, x.reaction) - b.reaction
    assert np.max(np.abs(resid)) / np.max(np.abs(b.reaction)) <= cfg.inner_tol * 5


# ---------------------------------------------------------------------------
# primal / adjoint solves
# ---------------------------------------------------------------------------

def test_zero_rhs_solves_to_zero_immediately():
    ctx = make_ctx(cluster(3, seed=3))
    x, rep = solve_primal(ctx, StateVector.zeros(3, ctx.nb))
    assert x.norm_inf() == 0.0
    assert rep.converged and rep.macro_iterations == 0


def test_born_energy_and_fast_convergence():
    s = Solute(np.zeros((1, 3)), np.array([2.0]), np.array([1.0]),
               eps1=1.0, eps2=78.54, kappa=0.104)
    ctx = make_ctx(s, lmax=6, nleb=110)
    cfg = SolverConfig(tol=1e-8)
    e, x, rep = solvation_energy(ctx, cfg)
    assert rep.macro_iterations <= 3
    ref = born_energy_kcal(1.0, 2.0, 1.0, 78.54, 0.104)
    assert abs(e - ref) < 1e-6 * abs(ref)


def test_residual_a_posteriori():
    solute = cluster(25, seed=5)
    ctx = make_ctx(solute, lmax=3)
    cfg = SolverConfig(tol=1e-6)
    rhs = build_rhs(ctx)
    x, rep = solve_primal(ctx, rhs, cfg)
    resid = apply_system(ctx, x) - rhs
    assert resid.norm_inf() / rhs.norm_inf() <= 10 * cfg.tol
    assert rep.final_increment <= cfg.tol


def test_adjoint_solve_residual_and_block_structure():
    solute = cluster(12, seed=7)
    ctx = make_ctx(solute, lmax=3)
    cfg = SolverConfig(tol=1e-8)
    q = adjoint_rhs(solute, ctx.nb)
    xa, rep = solve_adjoint(ctx, q, cfg)
    resid = apply_system_adjoint(ctx, xa) - q
    assert resid.norm_inf() / q.norm_inf() <= 10 * cfg.tol


def test_adjoint_single_sphere_reaction_block_only():
    s = Solute(np.zeros((1, 3)), np.array([2.0]), np.array([1.0]))
    ctx = make_ctx(s, lmax=4)
    q = adjoint_rhs(s, ctx.nb)
    xa, _ = solve_adjoint(ctx, q, SolverConfig(tol=1e-10))
    # only the constant harmonic of the two blocks can be excited
    assert np.max(np.abs(xa.reaction[0, 1:])) < 1e-12
    assert np.max(np.abs(xa.extension[0, 1:])) < 1e-12


def test_duality_identity():
    solute = cluster(15, seed=9)
    ctx = make_ctx(solute, lmax=3)
    cfg = SolverConfig(tol=1e-10)
    rhs = build_rhs(ctx)
    x, _ = solve_primal(ctx, rhs, cfg)
    q = adjoint_rhs(solute, ctx.nb)
    xa, _ = solve_adjoint(ctx, q, cfg)
    lhs = xa.dot(rhs)
    rhs_v = q.dot(x)
    scale = max(abs(lhs), abs(rhs_v))
    assert abs(lhs - rhs_v) <= 1e-7 * scale
    # both equal twice the (unit-system) energy
    assert abs(lhs - 2.0 * energy(x, solute, unit="au")) <= 1e-7 * scale


def test_energy_zero_charges():
    s = Solute(RNG.normal(size=(3, 3)), np.full(3, 1.5), np.zeros(3))
    x = StateVector(RNG.normal(size=(3, 9)), RNG.normal(size=(3, 9)))
    assert energy(x, s) == 0.0


def test_solver_deterministic_repeat():
    solute = cluster(8, seed=11)
    ctx = make_ctx(solute, lmax=3)
    cfg = SolverConfig(tol=1e-7, deterministic=True)
    rhs = build_rhs(ctx)
    x1, _ = solve_primal(ctx, rhs, cfg)
    x2, _ = solve_primal(ctx, rhs, cfg)
    assert np.array_equal(x1.reaction, x2.reaction)
    assert np.array_equal(x1.extension, x2.extension)


def test_macro_cap_raises_with_report():
    solute = cluster(10, seed=13)
    ctx = make_ctx(solute, lmax=2)
    cfg = SolverConfig(tol=1e-12, max_macro=1)
    rhs = build_rhs(ctx)
    with pytest.raises(ConvergenceError) as exc:
        solve_primal(ctx, rhs, cfg)
    assert exc.value.report is not None
    assert exc.value.report.macro_iterations == 1


def test_translation_invariance_of_energy():
    solute = cluster(9, seed=15)
    cfg = SolverConfig(tol=1e-9)
    e1 = solvation_energy(make_ctx(solute, lmax=4), cfg)[0]
    e2 = solvation_energy(make_ctx(solute.translated([3.1, -2.0, 0.7]),
                                   lmax=4), cfg)[0]
    assert abs(e1 - e2) < 1e-8 * abs(e1)


def test_kappa_helper_reproduces_reference_point():
    k = kappa_from_ionic_strength(0.1, 298.15, 78.54)
    assert abs(k - 0.104) < 5e-4


def test_warm_start_micro_iterations_stay_bounded():
    from helpers import chain_cluster
    solute = chain_cluster(20, seed=17)
    ctx = make_ctx(solute, lmax=3)
    cfg = SolverConfig(tol=1e-8)
    rhs = build_rhs(ctx)
    _, rep = solve_primal(ctx, rhs, cfg)
    # warm-started totals stay well below a cold-start bound per macro pass
    assert rep.total_micro_iterations < (rep.macro_iterations + 1) * 2 * 40
