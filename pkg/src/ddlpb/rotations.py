"""Rotation matrices for real spherical-harmonic coefficient vectors.

For a 3x3 rotation ``R`` the per-degree orthogonal blocks ``D^l`` satisfy

    Y_lm(R u) = sum_m' D^l[m, m'] Y_lm'(u),

built by the standard degree-recurrence for real bases.  Blocks are
orthogonal, so coefficient vectors rotate without changing per-degree
norms.
"""

import numpy as np
from numba import njit

from .harmonics import basis_size


@njit(cache=True)
def _p_term(i, l, mu, mp, r1, prev):
    # prev holds the degree-(l-1) block, indices offset by l-1
    if mp == l:
        return (r1[i + 1, 2] * prev[mu + l - 1, 2 * l - 2]
                - r1[i + 1, 0] * prev[mu + l - 1, 0])
    elif mp == -l:
        return (r1[i + 1, 2] * prev[mu + l - 1, 0]
                + r1[i + 1, 0] * prev[mu + l - 1, 2 * l - 2])
    else:
        return r1[i + 1, 1] * prev[mu + l - 1, mp + l - 1]


@njit(cache=True)
def _degree_block(l, r1, prev, out):
    for m in range(-l, l + 1):
        am = abs(m)
        for mp in range(-l, l + 1):
            if abs(mp) < l:
                denom = float((l + mp) * (l - mp))
            else:
                denom = float((2 * l) * (2 * l - 1))
            total = 0.0
            cu = (l + m) * (l - m)
            if cu > 0:
                total += np.sqrt(cu / denom) * _p_term(0, l, m, mp, r1, prev)
            cv = (1.0 + (1.0 if m == 0 else 0.0)) * (l + am - 1) * (l + am)
            if cv > 0:
                v = 0.5 * np.sqrt(cv / denom) * (1.0 - 2.0 * (1.0 if m == 0 else 0.0))
                if m == 0:
                    pv = _p_term(1, l, 1, mp, r1, prev) + _p_term(-1, l, -1, mp, r1, prev)
                elif m > 0:
                    pv = (_p_term(1, l, m - 1, mp, r1, prev)
                          * np.sqrt(2.0 if m == 1 else 1.0)
                          - _p_term(-1, l, -m + 1, mp, r1, prev)
                          * (0.0 if m == 1 else 1.0))
                else:
                    pv = (_p_term(1, l, m + 1, mp, r1, prev)
                          * (0.0 if m == -1 else 1.0)
                          + _p_term(-1, l, -m - 1, mp, r1, prev)
                          * np.sqrt(2.0 if m == -1 else 1.0))
                total += v * pv
            cw = (l - am - 1) * (l - am)
            if cw > 0 and m != 0:
                w = -0.5 * np.sqrt(cw / denom)
                if m > 0:
                    pw = (_p_term(1, l, m + 1, mp, r1, prev)
                          + _p_term(-1, l, -m - 1, mp, r1, prev))
                else:
                    pw = (_p_term(1, l, m - 1, mp, r1, prev)
                          - _p_term(-1, l, -m + 1, mp, r1, prev))
                total += w * pw
            out[m + l, mp + l] = total


@njit(cache=True)
def _rotation_dense(rot, lmax, nb, out):
    # degree-1 block in the (y, z, x) ordering of real harmonics
    r1 = np.empty((3, 3))
    r1[0, 0] = rot[1, 1]
    r1[0, 1] = rot[1, 2]
    r1[0, 2] = rot[1, 0]
    r1[1, 0] = rot[2, 1]
    r1[1, 1] = rot[2, 2]
    r1[1, 2] = rot[2, 0]
    r1[2, 0] = rot[0, 1]
    r1[2, 1] = rot[0, 2]
    r1[2, 2] = rot[0, 0]
    out[0, 0] = 1.0
    if lmax == 0:
        return
    for a in range(3):
        for b in range(3):
            out[1 + a, 1 + b] = r1[a, b]
    prev = r1
    for l in range(2, lmax + 1):
        cur = np.empty((2 * l + 1, 2 * l + 1))
        _degree_block(l, r1, prev, cur)
        base = l * l
        for a in range(2 * l + 1):
            for b in range(2 * l + 1):
                out[base + a, base + b] = cur[a, b]
        prev = cur


def rotation_blocks(rot, lmax):
    """Block-diagonal rotation operator for coefficients up to ``lmax``.

    Returns a dense ((lmax+1)^2, (lmax+1)^2) matrix whose degree blocks
    are the orthogonal D^l; entries between degrees are zero.
    """
    rot = np.ascontiguousarray(rot, dtype=np.float64)
    nb = basis_size(lmax)
    out = np.zeros((nb, nb))
    _rotation_dense(rot, lmax, nb, out)
    return out


def rotate_expansion(coeffs, rot, lmax):
    """Rotate a coefficient vector: the result, evaluated at ``rot @ u``,
    equals the original expansion evaluated at ``u``."""
    blocks = rotation_blocks(rot, lmax)
    return apply_blockdiag(blocks, np.asarray(coeffs, dtype=np.float64), lmax)


def apply_blockdiag(blocks, coeffs, lmax):
    """Apply a block-diagonal per-degree operator to coefficient vector(s)."""
    out = np.empty_like(coeffs)
    for l in range(lmax + 1):
        sl = slice(l * l, (l + 1) * (l + 1))
        out[..., sl] = coeffs[..., sl] @ blocks[sl, sl].T
    return out


def rotation_aligning(v):
    """A rotation matrix mapping unit vector ``v`` onto the +z axis."""
    v = np.asarray(v, dtype=np.float64)
    v = v / np.linalg.norm(v)
    # pick the axis least aligned with v to seed an orthonormal frame
    a = np.zeros(3)
    a[np.argmin(np.abs(v))] = 1.0
    t1 = a - np.dot(a, v) * v
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(v, t1)
    return np.vstack([t1, t2, v])
