"""Matrix-free application of the discretized solvation operators.

The coupled system couples a Laplace-type block (identity minus
neighbor projections with radial power scalings), a screened block
(same structure with first-kind Bessel scalings), and a dense coupling
built from outgoing Yukawa expansions of every sphere.  Only operator
actions are ever formed; the dense coupling is never assembled.

The single-layer sums run either as direct O(M^2) loops or through a
fast-multipole engine attached to the context (see the fmm module);
both expose identical forward/transpose/gradient entry points.
"""

import numpy as np

from . import _opkernels
from .bessel import bessel_i_scaled, bessel_k_scaled
from .errors import ConfigurationError, DomainError, SingularInputError
from .harmonics import HarmonicBasis, basis_degrees, basis_size
from .state import StateVector

# quadrature points closer than this to a point charge indicate a
# malformed structure (charges sit at sphere centers by construction)
SINGULARITY_CUTOFF = 1e-10

KAPPA_MIN = 1e-8


class DirectSums:
    """Dense-loop backend for the Yukawa single-layer sums."""

    def __init__(self, ctx):
        self.ctx = ctx
        m = ctx.n_spheres
        npts = m * ctx.n_leb
        self._tgt_ptr = np.array([0, npts], dtype=np.int64)
        self._tgt_pts = np.arange(npts, dtype=np.int64)
        self._src_ptr = np.array([0, m], dtype=np.int64)
        self._src_idx = np.arange(m, dtype=np.int64)

    def eval(self, coeffs):
        ctx = self.ctx
        phi = np.zeros(ctx.pointsf.shape[0])
        dmin = _opkernels.yukawa_eval(
            ctx.lmax, ctx.kappa, ctx.pointsf, ctx.eval_mask,
            self._tgt_ptr, self._tgt_pts, self._src_ptr, self._src_idx,
            ctx.centers, ctx.radii, ctx.khat_r, coeffs, ctx.norms, phi)
        if dmin < SINGULARITY_CUTOFF:
            raise SingularInputError(
                "a quadrature point coincides with a sphere center")
        return phi

    def accumulate(self, weights):
        ctx = self.ctx
        acc = np.zeros((ctx.n_spheres, ctx.nb))
        _opkernels.yukawa_accum(
            ctx.lmax, ctx.kappa, ctx.pointsf, ctx.eval_mask,
            self._tgt_ptr, self._tgt_pts, self._src_ptr, self._src_idx,
            ctx.centers, ctx.radii, ctx.khat_r, weights, ctx.norms, acc)
        return acc

    def eval_with_gradient(self, coeffs):
        ctx = self.ctx
        phi = np.zeros(ctx.pointsf.shape[0])
        gphi = np.zeros((ctx.pointsf.shape[0], 3))
        _opkernels.yukawa_eval_grad(
            ctx.lmax, ctx.kappa, ctx.pointsf, ctx.eval_mask,
            self._tgt_ptr, self._tgt_pts, self._src_ptr, self._src_idx,
            ctx.centers, ctx.radii, ctx.khat_r, coeffs, ctx.norms, phi, gphi)
        return phi, gphi

    def accumulate_with_gradient(self, weights):
        ctx = self.ctx
        acc = np.zeros((ctx.n_spheres, ctx.nb))
        gacc = np.zeros((ctx.n_spheres, ctx.nb, 3))
        _opkernels.yukawa_accum_grad(
            ctx.lmax, ctx.kappa, ctx.pointsf, ctx.eval_mask,
            self._tgt_ptr, self._tgt_pts, self._src_ptr, self._src_idx,
            ctx.centers, ctx.radii, ctx.khat_r, weights, ctx.norms, acc, gacc)
        return acc, gacc


class OperatorContext:
    """Precomputed tables binding a cavity to a harmonic basis.

    Parameters
    ----------
    cavity : CavityGrid
    lmax : maximum spherical-harmonic degree
    mode : "incore" (assemble sparse neighbor blocks once) or
        "onthefly" (recompute their coefficients during each product)
    farfield : optional fast-multipole engine; ``None`` keeps the
        direct O(M^2) path for the single-layer sums
    """

    def __init__(self, cavity, lmax, mode="incore", farfield=None):
        if mode not in ("incore", "onthefly"):
            raise ConfigurationError(f"unknown mode {mode!r}")
        solute = cavity.solute
        if solute.kappa < KAPPA_MIN:
            raise ConfigurationError(
                f"kappa must be >= {KAPPA_MIN} for the screened operators; "
                "use a tiny positive kappa to emulate the non-ionic limit")
        self.cavity = cavity
        self.solute = solute
        self.basis = HarmonicBasis(lmax)
        self.lmax = lmax
        self.nb = basis_size(lmax)
        self.mode = mode
        self.kappa = solute.kappa
        self.centers = solute.centers
        self.radii = solute.radii
        self.norms = self.basis.norms
        self.degrees = basis_degrees(lmax)

        grid = cavity.grid
        self.n_leb = grid.n_points
        self.n_spheres = solute.n_spheres
        self.lebw = grid.weights
        # basis sampled on the reference grid directions
        from ._kernels import ylm_batch
        self.ygrid = ylm_batch(lmax, np.ascontiguousarray(grid.directions),
                               self.norms)
        self.pointsf = np.ascontiguousarray(
            cavity.points.reshape(-1, 3))
        # single-layer sums are needed where a point is exposed (chi > 0)
        # or where exposure gradients can be nonzero (f <= 1)
        self.eval_mask = ((cavity.chi > 0.0) | (cavity.f <= 1.0)).reshape(-1)

        m = self.n_spheres
        lmax1 = lmax + 1
        self.ihat_r = np.empty((m, lmax1))
        dihat_r = np.empty((m, lmax1))
        self.khat_r = np.empty((m, lmax1))
        dkhat_r = np.empty((m, lmax1))
        for j in range(m):
            x = self.kappa * self.radii[j]
            self.ihat_r[j], dihat_r[j] = bessel_i_scaled(lmax, x)
            self.khat_r[j], dkhat_r[j] = bessel_k_scaled(lmax, x)
        # logarithmic radial derivatives of the two scalings at the
        # sphere boundary (the chain factor kappa included)
        self.i_logderiv = self.kappa * dihat_r / self.ihat_r
        self.k_logderiv = self.kappa * dkhat_r / self.khat_r
        self.layer_coupling = 1.0 / (self.i_logderiv - self.k_logderiv)
        if not np.all(np.isfinite(self.layer_coupling)) or \
                not np.all(self.layer_coupling > 0):
            raise ConfigurationError("layer coupling constants must be "
                                     "finite and positive")

        # per-sphere exposure projection matrices P_j (symmetric)
        wchi = self.lebw[None, :] * cavity.chi
        self.pmat = np.einsum("na,in,nb->iab", self.ygrid, wchi, self.ygrid,
                              optimize=True)

        self._blocks_a = None
        self._blocks_b = None
        if mode == "incore":
            self._assemble_blocks()

        self.sums = DirectSums(self) if farfield is None else farfield
        if farfield is not None:
            farfield.bind(self)

    # -- sparse blocks ------------------------------------------------

    def _assemble_blocks(self):
        cav = self.cavity
        nnz = cav.nbr_idx.size
        self._blocks_a = np.zeros((nnz, self.nb, self.nb))
        self._blocks_b = np.zeros((nnz, self.nb, self.nb))
        for use_bessel, blocks in ((False, self._blocks_a),
                                   (True, self._blocks_b)):
            _opkernels.ab_blocks(
                use_bessel, self.lmax, self.kappa, self.centers, self.radii,
                cav.points, cav.nbr_ptr, cav.nbr_idx, cav.pair_dist,
                cav.pair_chi, cav.d, self.ihat_r, self.norms, self.lebw,
                self.ygrid, blocks)
        rows = np.repeat(np.arange(self.n_spheres),
                         np.diff(cav.nbr_ptr))
        self._rows = rows

    def _apply_sparse(self, x, use_bessel):
        cav = self.cavity
        if self.mode == "incore":
            blocks = self._blocks_b if use_bessel else self._blocks_a
            out = x.copy()
            if cav.nbr_idx.size:
                prod = np.einsum("pab,pb->pa", blocks, x[cav.nbr_idx])
                np.subtract.at(out, self._rows, prod)
            return out
        tmp = np.empty((self.n_spheres, self.n_leb))
        _opkernels.ab_forward(
            use_bessel, self.lmax, self.kappa, self.centers, self.radii,
            cav.points, cav.nbr_ptr, cav.nbr_idx, cav.pair_dist,
            cav.pair_chi, cav.d, self.ihat_r, self.norms,
            np.ascontiguousarray(x), tmp)
        return x - (tmp * self.lebw[None, :]) @ self.ygrid

    def _apply_sparse_adjoint(self, y, use_bessel):
        cav = self.cavity
        if self.mode == "incore":
            blocks = self._blocks_b if use_bessel else self._blocks_a
            out = y.copy()
            if cav.nbr_idx.size:
                prod = np.einsum("pab,pa->pb", blocks, y[self._rows])
                np.subtract.at(out, cav.nbr_idx, prod)
            return out
        syn = (y @ self.ygrid.T) * self.lebw[None, :]
        out = y.copy()
        contrib = np.zeros_like(y)
        _opkernels.ab_adjoint(
            use_bessel, self.lmax, self.kappa, self.centers, self.radii,
            cav.points, cav.nbr_ptr, cav.nbr_idx, cav.pair_dist,
            cav.pair_chi, cav.d, self.ihat_r, self.norms,
            np.ascontiguousarray(syn), contrib)
        return out - contrib


def apply_laplace_block(ctx, x):
    """Action of the Laplace-side sparse block on reaction coefficients."""
    _check_shape(ctx, x)
    return ctx._apply_sparse(x, use_bessel=False)


def apply_laplace_block_adjoint(ctx, y):
    _check_shape(ctx, y)
    return ctx._apply_sparse_adjoint(y, use_bessel=False)


def apply_screened_block(ctx, x):
    """Action of the screened-side sparse block on extension coefficients."""
    _check_shape(ctx, x)
    return ctx._apply_sparse(x, use_bessel=True)


def apply_screened_block_adjoint(ctx, y):
    _check_shape(ctx, y)
    return ctx._apply_sparse_adjoint(y, use_bessel=True)


def _check_shape(ctx, x):
    if x.shape != (ctx.n_spheres, ctx.nb):
        raise DomainError(
            f"coefficient array must have shape {(ctx.n_spheres, ctx.nb)}, "
            f"got {x.shape}")


def assemble_exposure_projection(ctx, j):
    """The symmetric per-sphere projection weighted by exposure."""
    return ctx.pmat[j]


def coupling_source(ctx, x_r, x_e):
    """Per-sphere bracket combining both fields' boundary data."""
    eps_ratio = ctx.solute.eps1 / ctx.solute.eps2
    ld = ctx.i_logderiv[:, ctx.degrees]
    lr = ctx.degrees[None, :] / ctx.radii[:, None]
    return eps_ratio * lr * x_r - ld * x_e


def outgoing_coefficients(ctx, x_r, x_e):
    """Outgoing Yukawa expansion coefficients of every sphere."""
    v = coupling_source(ctx, x_r, x_e)
    pv = np.einsum("iab,ib->ia", ctx.pmat, v)
    return ctx.layer_coupling[:, ctx.degrees] * pv


def apply_coupling(ctx, x_r, x_e):
    """Action of the dense coupling on both blocks (single shared row)."""
    _check_shape(ctx, x_r)
    _check_shape(ctx, x_e)
    coeffs = outgoing_coefficients(ctx, x_r, x_e)
    phi = ctx.sums.eval(coeffs).reshape(ctx.n_spheres, ctx.n_leb)
    return ((phi * ctx.cavity.chi) * ctx.lebw[None, :]) @ ctx.ygrid


def apply_coupling_adjoint(ctx, z):
    """Transpose action; returns the two adjoint blocks (C1^T z, C2^T z)."""
    _check_shape(ctx, z)
    syn = z @ ctx.ygrid.T
    weights = (syn * ctx.cavity.chi * ctx.lebw[None, :]).reshape(-1)
    acc = ctx.sums.accumulate(weights)
    u = np.einsum("iab,ia->ib",
                  ctx.pmat, ctx.layer_coupling[:, ctx.degrees] * acc)
    eps_ratio = ctx.solute.eps1 / ctx.solute.eps2
    c1t = eps_ratio * (ctx.degrees[None, :] / ctx.radii[:, None]) * u
    c2t = -ctx.i_logderiv[:, ctx.degrees] * u
    return c1t, c2t


def vacuum_potential_on_points(ctx):
    """psi0 at every masked quadrature point, shaped (M, N)."""
    out = np.zeros(ctx.pointsf.shape[0])
    dmin = _opkernels.psi0_values(ctx.pointsf, ctx.eval_mask, ctx.centers,
                                  ctx.solute.charges, ctx.solute.eps1, out)
    if dmin < SINGULARITY_CUTOFF:
        raise SingularInputError(
            "a quadrature point coincides with a point charge")
    return out.reshape(ctx.n_spheres, ctx.n_leb)


def vacuum_normal_derivative(ctx):
    """Normal derivative of psi0 at every masked point, shaped (M, N)."""
    out = np.zeros((ctx.n_spheres, ctx.n_leb))
    dmin = _opkernels.psi0_normal_deriv(
        ctx.cavity.points, ctx.eval_mask,
        np.ascontiguousarray(ctx.cavity.grid.directions),
        ctx.centers, ctx.solute.charges, ctx.solute.eps1, out)
    if dmin < SINGULARITY_CUTOFF:
        raise SingularInputError(
            "a quadrature point coincides with a point charge")
    return out


def rhs_potential(ctx):
    """Right-hand-side block sourced by the vacuum potential values."""
    psi0 = vacuum_potential_on_points(ctx)
    return -((psi0 * ctx.cavity.chi) * ctx.lebw[None, :]) @ ctx.ygrid


def flux_moments(ctx):
    """Per-sphere harmonic moments of the vacuum flux through the boundary."""
    dpn = vacuum_normal_derivative(ctx)
    return ((dpn * ctx.cavity.chi) * ctx.lebw[None, :]) @ ctx.ygrid


def flux_outgoing_coefficients(ctx, moments=None):
    if moments is None:
        moments = flux_moments(ctx)
    return ctx.layer_coupling[:, ctx.degrees] * moments


def rhs_flux(ctx):
    """Right-hand-side block sourced by the vacuum flux (single layer)."""
    coeffs = flux_outgoing_coefficients(ctx)
    sval = ctx.sums.eval(coeffs).reshape(ctx.n_spheres, ctx.n_leb)
    eps_ratio = ctx.solute.eps1 / ctx.solute.eps2
    return -eps_ratio * ((sval * ctx.cavity.chi) * ctx.lebw[None, :]) @ ctx.ygrid


def build_rhs(ctx):
    """Assemble the full right-hand side [potential + flux; flux]."""
    g0 = rhs_potential(ctx)
    f0 = rhs_flux(ctx)
    return StateVector(g0 + f0, f0.copy())


def apply_system(ctx, x):
    """Full operator action on a StateVector."""
    c = apply_coupling(ctx, x.reaction, x.extension)
    return StateVector(apply_laplace_block(ctx, x.reaction) + c,
                       apply_screened_block(ctx, x.extension) + c)


def apply_system_adjoint(ctx, y):
    """Transpose of ``apply_system`` (block-transpose structure)."""
    z = y.reaction + y.extension
    c1t, c2t = apply_coupling_adjoint(ctx, z)
    return StateVector(apply_laplace_block_adjoint(ctx, y.reaction) + c1t,
                       apply_screened_block_adjoint(ctx, y.extension) + c2t)


def eval_potentials(ctx, x, point, i):
    """Evaluate both fields of solution ``x`` at ``point`` inside sphere i."""
    point = np.asarray(point, dtype=np.float64)
    rel = point - ctx.centers[i]
    dist = np.linalg.norm(rel)
    ri = ctx.radii[i]
    if dist > ri * (1 + 1e-12):
        raise DomainError("evaluation point lies outside the sphere")
    from .harmonics import eval_harmonics
    if dist == 0.0:
        y00 = 1.0 / (2.0 * np.sqrt(np.pi))
        return x.reaction[i, 0] * y00, x.extension[i, 0] * y00
    y = eval_harmonics(ctx.basis, rel / dist)
    rad = (dist / ri) ** ctx.degrees
    ihat_d, _ = bessel_i_scaled(ctx.lmax, ctx.kappa * dist)
    irat = (ihat_d / ctx.ihat_r[i]) * np.exp(ctx.kappa * (dist - ri))
    psi_r = float(np.dot(x.reaction[i], rad * y))
    psi_e = float(np.dot(x.extension[i], irat[ctx.degrees] * y))
    return psi_r, psi_e
