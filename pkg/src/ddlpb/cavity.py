"""Cavity geometry: overlapping-sphere union, per-sphere quadrature
points, regularized partition weights and their position derivatives.

A quadrature point of sphere i is weighted by how much of it is exposed
to solvent (``chi``) versus buried inside neighboring spheres
(``omega`` weights per neighbor).  With smoothing width eta > 0 the
partition is C^1 in the atomic positions, which is what makes the
energy differentiable.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.spatial import cKDTree

from .errors import DomainError
from .lebgrid import LebedevGrid


@dataclass(frozen=True)
class Solute:
    """Point-charge solute in a dielectric continuum.

    Lengths in Angstrom, charges in elementary charge units, kappa in
    inverse Angstrom.  ``radii`` are the cavity radii actually used
    (any probe augmentation is applied before construction).
    """

    centers: np.ndarray   # (M, 3)
    radii: np.ndarray     # (M,)
    charges: np.ndarray   # (M,)
    eps1: float = 1.0
    eps2: float = 78.54
    kappa: float = 0.104

    def __post_init__(self):
        centers = np.ascontiguousarray(np.atleast_2d(self.centers), dtype=np.float64)
        radii = np.ascontiguousarray(np.atleast_1d(self.radii), dtype=np.float64)
        charges = np.ascontiguousarray(np.atleast_1d(self.charges), dtype=np.float64)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "charges", charges)
        if centers.ndim != 2 or centers.shape[1] != 3:
            raise DomainError("centers must have shape (M, 3)")
        m = centers.shape[0]
        if m < 1:
            raise DomainError("at least one sphere is required")
        if radii.shape != (m,) or charges.shape != (m,):
            raise DomainError("radii/charges must have shape (M,)")
        if not np.all(np.isfinite(centers)):
            raise DomainError("non-finite sphere center")
        if not np.all(radii > 0):
            raise DomainError("all radii must be positive")
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise DomainError("permittivities must be positive")
        if self.kappa < 0:
            raise DomainError("kappa must be >= 0")

    @property
    def n_spheres(self):
        return self.centers.shape[0]

    def translated(self, shift):
        return Solute(self.centers + np.asarray(shift), self.radii,
                      self.charges, self.eps1, self.eps2, self.kappa)

    def rotated(self, rot):
        rot = np.asarray(rot)
        return Solute(self.centers @ rot.T, self.radii, self.charges,
                      self.eps1, self.eps2, self.kappa)

    def displaced(self, k, delta):
        centers = self.centers.copy()
        centers[k] += delta
        return Solute(centers, self.radii, self.charges,
                      self.eps1, self.eps2, self.kappa)


@dataclass(frozen=True)
class SwitchParams:
    """Smoothing width of the regularized characteristic function."""

    eta: float = 0.1

    def __post_init__(self):
        if not (0.0 <= self.eta < 1.0):
            raise DomainError("eta must lie in [0, 1)")


@njit(cache=True)
def _switch_value(t, eta):
    if t <= 1.0 - eta:
        return 1.0
    if t >= 1.0:
        return 0.0
    # cubic-times-quadratic C^1 bridge on (1-eta, 1); the quadratic
    # coefficients make both endpoint values and slopes match.
    omt = 1.0 - t
    quad = 6.0 * t * t + (15.0 * eta - 12.0) * t + 10.0 * eta * eta - 15.0 * eta + 6.0
    return omt * omt * omt * quad / eta ** 5


@njit(cache=True)
def _switch_deriv(t, eta):
    if t <= 1.0 - eta or t >= 1.0:
        return 0.0
    omt = 1.0 - t
    b = 15.0 * eta - 12.0
    quad = 6.0 * t * t + b * t + 10.0 * eta * eta - 15.0 * eta + 6.0
    return (-3.0 * omt * omt * quad + omt * omt * omt * (12.0 * t + b)) / eta ** 5


def chi_eta(t, sw):
    """Regularized characteristic function: 1 inside, 0 outside,
    a C^1 polynomial bridge on (1-eta, 1)."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 0:
        return _switch_value(float(t), sw.eta)
    out = np.empty(t.shape)
    flat = t.ravel()
    o = out.ravel()
    for idx in range(flat.size):
        o[idx] = _switch_value(flat[idx], sw.eta)
    return out


def chi_eta_prime(t, sw):
    """Derivative of ``chi_eta`` with respect to t."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim == 0:
        return _switch_deriv(float(t), sw.eta)
    out = np.empty(t.shape)
    flat = t.ravel()
    o = out.ravel()
    for idx in range(flat.size):
        o[idx] = _switch_deriv(flat[idx], sw.eta)
    return out


@njit(cache=True)
def _fill_pair_tables(centers, radii, nbr_ptr, nbr_idx, points, eta,
                      pair_dist, pair_chi, pair_chi_prime,
                      f, d, chi, zvec):
    m = centers.shape[0]
    nleb = points.shape[1]
    for i in range(m):
        for n in range(nleb):
            px = points[i, n, 0]
            py = points[i, n, 1]
            pz = points[i, n, 2]
            fsum = 0.0
            zx = 0.0
            zy = 0.0
            zz = 0.0
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                j = nbr_idx[p]
                dx = px - centers[j, 0]
                dy = py - centers[j, 1]
                dz = pz - centers[j, 2]
                dist = np.sqrt(dx * dx + dy * dy + dz * dz)
                t = dist / radii[j]
                cv = _switch_value(t, eta)
                cd = _switch_deriv(t, eta)
                pair_dist[p, n] = dist
                pair_chi[p, n] = cv
                pair_chi_prime[p, n] = cd
                fsum += cv
                if cd != 0.0 and dist > 0.0:
                    w = cd / (radii[j] * dist)
                    zx += w * dx
                    zy += w * dy
                    zz += w * dz
            f[i, n] = fsum
            dv = 1.0 if fsum <= 1.0 else 1.0 / fsum
            d[i, n] = dv
            chi[i, n] = 0.0 if fsum > 1.0 else 1.0 - fsum
            zvec[i, n, 0] = zx
            zvec[i, n, 1] = zy
            zvec[i, n, 2] = zz


class CavityGrid:
    """Quadrature points of every sphere plus cached switching data.

    Immutable after construction; shared read-only by the operators,
    the solver, and the force contractions.

    Attributes
    ----------
    points : (M, N, 3) quadrature points x_i + r_i s_n
    nbr_ptr, nbr_idx : CSR neighbor lists (mutual by construction)
    pair_dist : (nnz, N) |x_i^n - x_j| for each neighbor pair (i, j)
    pair_chi, pair_chi_prime : switching values/derivatives at those t
    f : (nnz-sum per point) total neighbor coverage
    d : normalization min(f,1)/f (1 where f <= 1)
    chi : exposure weight of each point, in [0, 1]
    zvec : coverage-gradient vector frequently reused by derivatives
    """

    def __init__(self, solute, sw, grid):
        if not isinstance(grid, LebedevGrid):
            raise DomainError("grid must be a LebedevGrid")
        self.solute = solute
        self.sw = sw
        self.grid = grid
        m = solute.n_spheres
        centers = solute.centers
        radii = solute.radii

        dup = cKDTree(centers).query_pairs(r=1e-12, output_type="ndarray")
        if len(dup):
            warnings.warn("coincident sphere centers detected; union cavity "
                          "is still well defined", stacklevel=3)

        # mutual overlap test |x_i - x_j| < r_i + r_j via a single tree query
        tree = cKDTree(centers)
        pairs = tree.query_pairs(r=2.0 * radii.max(), output_type="ndarray")
        if len(pairs):
            sep = np.linalg.norm(centers[pairs[:, 0]] - centers[pairs[:, 1]], axis=1)
            keep = sep < radii[pairs[:, 0]] + radii[pairs[:, 1]]
            pairs = pairs[keep]
        both = np.vstack([pairs, pairs[:, ::-1]]) if len(pairs) else np.zeros((0, 2), dtype=np.int64)
        order = np.lexsort((both[:, 1], both[:, 0]))
        both = both[order]
        counts = np.bincount(both[:, 0], minlength=m)
        self.nbr_ptr = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(counts, out=self.nbr_ptr[1:])
        self.nbr_idx = np.ascontiguousarray(both[:, 1])

        self.points = centers[:, None, :] + radii[:, None, None] * grid.directions[None, :, :]
        nnz = self.nbr_idx.size
        nleb = grid.n_points
        self.pair_dist = np.empty((nnz, nleb))
        self.pair_chi = np.empty((nnz, nleb))
        self.pair_chi_prime = np.empty((nnz, nleb))
        self.f = np.empty((m, nleb))
        self.d = np.empty((m, nleb))
        self.chi = np.empty((m, nleb))
        self.zvec = np.empty((m, nleb, 3))
        _fill_pair_tables(centers, radii, self.nbr_ptr, self.nbr_idx,
                          self.points, sw.eta,
                          self.pair_dist, self.pair_chi, self.pair_chi_prime,
                          self.f, self.d, self.chi, self.zvec)
        for arr in (self.points, self.pair_dist, self.pair_chi,
                    self.pair_chi_prime, self.f, self.d, self.chi, self.zvec):
            arr.setflags(write=False)

    @property
    def n_spheres(self):
        return self.solute.n_spheres

    @property
    def n_leb(self):
        return self.grid.n_points

    def neighbors(self, i):
        return self.nbr_idx[self.nbr_ptr[i]:self.nbr_ptr[i + 1]]

    def _pair_slot(self, i, j):
        for p in range(self.nbr_ptr[i], self.nbr_ptr[i + 1]):
            if self.nbr_idx[p] == j:
                return p
        return -1

    def unit_from(self, i, n, j):
        """Unit vector from center j to quadrature point (i, n)."""
        p = self._pair_slot(i, j)
        if p >= 0:
            dist = self.pair_dist[p, n]
        else:
            dist = np.linalg.norm(self.points[i, n] - self.solute.centers[j])
        if dist <= 0:
            raise DomainError("quadrature point coincides with a sphere center")
        return (self.points[i, n] - self.solute.centers[j]) / dist


def build_cavity(solute, sw, grid):
    """Build the cavity geometry caches for ``solute`` on ``grid``."""
    return CavityGrid(solute, sw, grid)


def omega_ij(cavity, i, j, n):
    """Partition weight of neighbor j at quadrature point (i, n)."""
    p = cavity._pair_slot(i, j)
    if p < 0:
        return 0.0
    return cavity.d[i, n] * cavity.pair_chi[p, n]


def chi_i_exposure(cavity, i, n):
    """Exposure weight of quadrature point (i, n)."""
    return cavity.chi[i, n]


def grad_omega_ij(cavity, i, j, n, k):
    """Gradient of ``omega_ij`` at point (i, n) w.r.t. center k.

    Nonzero only for k = i, k = j, or k a neighbor of i.
    """
    p = cavity._pair_slot(i, j)
    if p < 0:
        return np.zeros(3)
    rj = cavity.solute.radii[j]
    d = cavity.d[i, n]
    w = d * cavity.pair_chi[p, n]
    buried = cavity.f[i, n] > 1.0
    if k == i:
        g = cavity.pair_chi_prime[p, n] * cavity.unit_from(i, n, j) / rj
        if buried:
            g = g - w * cavity.zvec[i, n]
        return d * g
    if k == j:
        g = -d * cavity.pair_chi_prime[p, n] * cavity.unit_from(i, n, j) / rj
        if buried:
            g = g * (1.0 - w)
        return g
    pk = cavity._pair_slot(i, k)
    if pk < 0 or not buried:
        return np.zeros(3)
    rk = cavity.solute.radii[k]
    return (w * d * cavity.pair_chi_prime[pk, n] / rk) * cavity.unit_from(i, n, k)


def grad_chi_i(cavity, i, n, k):
    """Gradient of the exposure weight at point (i, n) w.r.t. center k."""
    if cavity.f[i, n] > 1.0:
        return np.zeros(3)
    if k == i:
        return -cavity.zvec[i, n].copy()
    p = cavity._pair_slot(i, k)
    if p < 0:
        return np.zeros(3)
    rk = cavity.solute.radii[k]
    return (cavity.pair_chi_prime[p, n] / rk) * cavity.unit_from(i, n, k)
