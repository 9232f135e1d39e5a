"""Numba-compiled numerical kernels shared across the library.

Everything here is deterministic scalar/loop code: no parallel
reductions, so results are bit-reproducible for identical inputs.
"""

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# Real spherical harmonics
#
# Convention: orthonormal real basis without Condon-Shortley phase,
#   Y_{l,0}  = N_{l0} P_l(cos t)
#   Y_{l,m}  = sqrt(2) N_{lm} P_l^m(cos t) cos(m p)   (m > 0)
#   Y_{l,-m} = sqrt(2) N_{lm} P_l^m(cos t) sin(m p)   (m > 0)
# with P_l^m the unnormalized associated Legendre functions (no phase)
# and N_lm = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!).
# Coefficients are stored flat with index l*l + l + m.
# ---------------------------------------------------------------------------


def harmonic_norms(lmax):
    """Normalization and recurrence tables for the real basis.

    Returns a (lmax+2, lmax+2, 3) array: slot 0 holds N_lm (with the
    sqrt(2) folded in for m > 0), slots 1 and 2 the degree-recurrence
    coefficients (2l-1)/(l-m) and (l-1+m)/(l-m) so the evaluation
    kernels run division-free.
    """
    tables = np.zeros((lmax + 2, lmax + 2, 3))
    for l in range(lmax + 1):
        for m in range(l + 1):
            n = np.sqrt((2 * l + 1) / (4.0 * np.pi))
            for k in range(l - m + 1, l + m + 1):
                n /= np.sqrt(k)
            if m > 0:
                n *= np.sqrt(2.0)
            tables[l, m, 0] = n
    for l in range(lmax + 2):
        for m in range(l):
            tables[l, m, 1] = (2.0 * l - 1.0) / (l - m)
            tables[l, m, 2] = (l - 1.0 + m) / (l - m)
    return tables


@njit(cache=True)
def _legendre_table(lmax, c, s, P, norms):
    """Fill P[l, m] = P_l^m(c) for 0 <= m <= l <= lmax (s = sin(theta))."""
    pmm = 1.0
    for m in range(lmax + 1):
        if m > 0:
            pmm *= (2 * m - 1) * s
        P[m, m] = pmm
        if m < lmax:
            prev2 = pmm
            prev1 = (2 * m + 1) * c * pmm
            P[m + 1, m] = prev1
            for l in range(m + 2, lmax + 1):
                cur = norms[l, m, 1] * c * prev1 - norms[l, m, 2] * prev2
                P[l, m] = cur
                prev2 = prev1
                prev1 = cur


@njit(cache=True)
def _legendre_over_sin_table(lmax, c, s, U, norms):
    """Fill U[l, m] = P_l^m(c)/s for 1 <= m <= l (regular at the poles)."""
    umm = 1.0
    for m in range(1, lmax + 1):
        if m > 1:
            umm *= (2 * m - 1) * s
        U[m, m] = umm
        if m < lmax:
            prev2 = umm
            prev1 = (2 * m + 1) * c * umm
            U[m + 1, m] = prev1
            for l in range(m + 2, lmax + 1):
                cur = norms[l, m, 1] * c * prev1 - norms[l, m, 2] * prev2
                U[l, m] = cur
                prev2 = prev1
                prev1 = cur


@njit(cache=True)
def _ylm_point(lmax, x, y, z, norms, P, cosm, sinm, out):
    """Evaluate all Y_lm at one unit direction (x, y, z) into ``out``."""
    s = np.sqrt(x * x + y * y)
    c = z
    if s > 0.0:
        cp = x / s
        sp = y / s
    else:
        cp = 1.0
        sp = 0.0
    _legendre_table(lmax, c, s, P, norms)
    cosm[0] = 1.0
    sinm[0] = 0.0
    for m in range(1, lmax + 1):
        cosm[m] = cosm[m - 1] * cp - sinm[m - 1] * sp
        sinm[m] = sinm[m - 1] * cp + cosm[m - 1] * sp
    for l in range(lmax + 1):
        base = l * l + l
        out[base] = norms[l, 0, 0] * P[l, 0]
        for m in range(1, l + 1):
            f = norms[l, m, 0] * P[l, m]
            out[base + m] = f * cosm[m]
            out[base - m] = f * sinm[m]


@njit(cache=True)
def _ylm_grad_point(lmax, x, y, z, norms, P, U, cosm, sinm, out, gout):
    """Evaluate Y_lm and their tangential gradients at one unit direction.

    ``gout`` has shape (nbasis, 3); gradients satisfy g . u = 0.
    """
    s = np.sqrt(x * x + y * y)
    c = z
    if s > 0.0:
        cp = x / s
        sp = y / s
    else:
        cp = 1.0
        sp = 0.0
    _legendre_table(lmax, c, s, P, norms)
    _legendre_over_sin_table(lmax, c, s, U, norms)
    cosm[0] = 1.0
    sinm[0] = 0.0
    for m in range(1, lmax + 1):
        cosm[m] = cosm[m - 1] * cp - sinm[m - 1] * sp
        sinm[m] = sinm[m - 1] * cp + cosm[m - 1] * sp
    # unit vectors of the local spherical frame
    tx = c * cp
    ty = c * sp
    tz = -s
    px = -sp
    py = cp
    for l in range(lmax + 1):
        base = l * l + l
        out[base] = norms[l, 0, 0] * P[l, 0]
        dth = -norms[l, 0, 0] * (P[l, 1] if l >= 1 else 0.0)
        gout[base, 0] = dth * tx
        gout[base, 1] = dth * ty
        gout[base, 2] = dth * tz
        for m in range(1, l + 1):
            nf = norms[l, m, 0]
            pm = P[l, m]
            out[base + m] = nf * pm * cosm[m]
            out[base - m] = nf * pm * sinm[m]
            pm_lo = P[l, m - 1]
            pm_hi = P[l, m + 1] if m + 1 <= l else 0.0
            dp = 0.5 * ((l + m) * (l - m + 1) * pm_lo - pm_hi)
            dth_c = nf * dp * cosm[m]
            dth_s = nf * dp * sinm[m]
            dph_c = -nf * m * U[l, m] * sinm[m]
            dph_s = nf * m * U[l, m] * cosm[m]
            gout[base + m, 0] = dth_c * tx + dph_c * px
            gout[base + m, 1] = dth_c * ty + dph_c * py
            gout[base + m, 2] = dth_c * tz
            gout[base - m, 0] = dth_s * tx + dph_s * px
            gout[base - m, 1] = dth_s * ty + dph_s * py
            gout[base - m, 2] = dth_s * tz


@njit(cache=True)
def ylm_batch(lmax, u, norms):
    """Y_lm for a batch of unit directions; returns (npts, (lmax+1)^2)."""
    n = u.shape[0]
    nb = (lmax + 1) * (lmax + 1)
    out = np.empty((n, nb))
    P = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    for p in range(n):
        _ylm_point(lmax, u[p, 0], u[p, 1], u[p, 2], norms, P, cosm, sinm, out[p])
    return out


@njit(cache=True)
def ylm_grad_batch(lmax, u, norms):
    """Y_lm and tangential gradients for a batch of unit directions."""
    n = u.shape[0]
    nb = (lmax + 1) * (lmax + 1)
    out = np.empty((n, nb))
    gout = np.empty((n, nb, 3))
    P = np.zeros((lmax + 2, lmax + 2))
    U = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    for p in range(n):
        _ylm_grad_point(lmax, u[p, 0], u[p, 1], u[p, 2], norms, P, U,
                        cosm, sinm, out[p], gout[p])
    return out, gout


# ---------------------------------------------------------------------------
# Modified spherical Bessel functions, exponentially scaled.
#
#   ihat_l(x) = exp(-x) i_l(x)          (first kind)
#   khat_l(x) = x exp(x) k_l(x)         (second kind, e^-x/x convention)
#
# Only ratios and logarithmic derivatives enter the method, so the
# constant prefactor of k_l is immaterial; the scalings keep every
# intermediate representable for arguments up to thousands.
# ---------------------------------------------------------------------------


@njit(cache=True)
def ihat_fill(lmax, x, vals, derivs):
    """Fill ihat_l(x) and exp(-x) i_l'(x) for l = 0..lmax; x > 0.

    ``derivs`` is used as scratch for the downward ratio recurrence.
    """
    if x < 1e-3:
        # truncated ascending series, relative error < 1e-16 on this range
        e = np.exp(-x)
        dfact = 1.0
        xl = 1.0
        x2 = x * x
        for l in range(lmax + 1):
            if l > 0:
                dfact *= 2 * l + 1
                xl *= x
            t1 = x2 / (2.0 * (2 * l + 3))
            t2 = x2 * x2 / (8.0 * (2 * l + 3) * (2 * l + 5))
            vals[l] = e * xl / dfact * (1.0 + t1 + t2)
    else:
        # ratios i_l/i_{l-1} by downward recurrence, then scale from ihat_0
        nstart = lmax + 26 + int(1.5 * min(x, 5000.0))
        r = x / (2.0 * nstart + 3.0)
        for l in range(nstart, 0, -1):
            r = x / ((2 * l + 1) + x * r)
            if l <= lmax:
                derivs[l] = r
        vals[0] = -np.expm1(-2.0 * x) / (2.0 * x)
        for l in range(1, lmax + 1):
            vals[l] = vals[l - 1] * derivs[l]
    # derivatives: i'_0 = i_1, i'_l = i_{l-1} - (l+1)/x i_l
    if lmax >= 1:
        derivs[0] = vals[1]
    elif x < 1e-3:
        derivs[0] = np.exp(-x) * (x / 3.0) * (1.0 + x * x / 10.0)
    else:
        derivs[0] = vals[0] * (1.0 / np.tanh(x) - 1.0 / x)
    for l in range(lmax, 0, -1):
        derivs[l] = vals[l - 1] - (l + 1) / x * vals[l]


@njit(cache=True)
def khat_fill(lmax, x, vals, derivs):
    """Fill khat_l(x) and x exp(x) k_l'(x) for l = 0..lmax; x > 0."""
    invx = 1.0 / x
    vals[0] = 1.0
    if lmax >= 1:
        vals[1] = 1.0 + invx
    for l in range(1, lmax):
        vals[l + 1] = vals[l - 1] + (2 * l + 1) * invx * vals[l]
    if lmax >= 1:
        derivs[0] = -vals[1]
    else:
        derivs[0] = -(1.0 + invx)
    for l in range(1, lmax + 1):
        derivs[l] = -vals[l - 1] - (l + 1) * invx * vals[l]
