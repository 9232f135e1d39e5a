"""Real orthonormal spherical harmonics and their tangential gradients.

Basis ordering is flat over (l, m) with index ``l*l + l + m`` and m
running from -l to l; the basis has ``(lmax+1)**2`` members.  The sign
convention carries no Condon-Shortley phase.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DomainError


def basis_size(lmax):
    return (lmax + 1) * (lmax + 1)


def basis_index(l, m):
    """Flat index of the degree-l, order-m basis function."""
    return l * l + l + m


def basis_degrees(lmax):
    """Degree l of every flat basis index, as an integer array."""
    nb = basis_size(lmax)
    ls = np.empty(nb, dtype=np.int64)
    for l in range(lmax + 1):
        ls[l * l:(l + 1) * (l + 1)] = l
    return ls


@dataclass(frozen=True)
class HarmonicBasis:
    """Truncated real spherical-harmonic basis up to degree ``lmax``."""

    lmax: int
    norms: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.lmax < 0:
            raise DomainError("lmax must be >= 0")
        object.__setattr__(self, "norms", _kernels.harmonic_norms(self.lmax))

    @property
    def size(self):
        return basis_size(self.lmax)


def _check_unit(u, tol=1e-12):
    norms = np.linalg.norm(u, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= tol):
        raise DomainError("direction vectors must have unit length")


def eval_harmonics(basis, u):
    """Evaluate every basis function at unit direction(s) ``u``.

    Parameters
    ----------
    basis : HarmonicBasis
    u : (3,) or (n, 3) array of unit vectors

    Returns
    -------
    (size,) or (n, size) array of Y_lm values.
    """
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    _check_unit(pts)
    out = _kernels.ylm_batch(basis.lmax, np.ascontiguousarray(pts), basis.norms)
    return out[0] if single else out


def eval_harmonic_gradients(basis, u):
    """Evaluate basis values and tangential gradients at ``u``.

    Returns
    -------
    (values, gradients) with shapes (..., size) and (..., size, 3).
    Each gradient is orthogonal to the input direction.
    """
    u = np.asarray(u, dtype=np.float64)
    single = u.ndim == 1
    pts = np.atleast_2d(u)
    _check_unit(pts)
    vals, grads = _kernels.ylm_grad_batch(
        basis.lmax, np.ascontiguousarray(pts), basis.norms)
    if single:
        return vals[0], grads[0]
    return vals, grads
