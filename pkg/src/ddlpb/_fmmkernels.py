"""Numba kernels for the Yukawa translation operators and leaf passes.

Translations along the z axis couple only equal orders; general
directions are handled by conjugating with the real rotation blocks.
The operator convention throughout: ``out = T @ in`` re-expands a field
whose source center sits at ``target_center + rho * e_z``.
"""

import numpy as np
from numba import njit

from ._kernels import _ylm_point, ihat_fill, khat_fill
from .rotations import _rotation_dense

M2M = 0
M2L = 1
L2L = 2


@njit(cache=True)
def ihat_vals(lmax, x, vals):
    """exp(-x) i_l(x) without derivatives; accepts x = 0."""
    if x < 1e-3:
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
        nstart = lmax + 26 + int(1.5 * min(x, 5000.0))
        r = x / (2.0 * nstart + 3.0)
        ratios = np.empty(lmax + 1)
        for l in range(nstart, 0, -1):
            r = x / ((2 * l + 1) + x * r)
            if l <= lmax:
                ratios[l] = r
        vals[0] = -np.expm1(-2.0 * x) / (2.0 * x)
        for l in range(1, lmax + 1):
            vals[l] = vals[l - 1] * ratios[l]


@njit(cache=True)
def khat_only(lmax, x, vals):
    invx = 1.0 / x
    vals[0] = 1.0
    if lmax >= 1:
        vals[1] = 1.0 + invx
    for l in range(1, lmax):
        vals[l + 1] = vals[l - 1] + (2 * l + 1) * invx * vals[l]


@njit(cache=True)
def _cn(l, lp, am, fact):
    # (2lp+1)(lp-am)!(l+am)! * Ntilde_l / Ntilde_lp with the m-independent
    # parts of the normalization cancelling in the ratio
    ratio = np.sqrt(((2 * l + 1) * fact[l - am] * fact[lp + am])
                    / ((2 * lp + 1) * fact[lp - am] * fact[l + am]))
    return ratio * (2 * lp + 1) * fact[lp - am] * fact[l + am]


@njit(cache=True)
def _ck(l, lp, am, k, fact):
    return (fact[2 * k] / (2.0 ** k * fact[k + am] * fact[k]
                           * fact[k - am] * fact[lp - k] * fact[l - k]))


@njit(cache=True)
def oz_fill(kind, rho, r_s, r_t, kappa, pmax, fact, out):
    """Fill the z-axis translation matrix for the given operator kind.

    ``out`` has shape ((pmax+1)^2, (pmax+1)^2) and couples only entries
    of equal order m.  Source scale r_s, target scale r_t.
    """
    nb = (pmax + 1) * (pmax + 1)
    for a in range(nb):
        for b in range(nb):
            out[a, b] = 0.0
    a_s = kappa * r_s
    b_t = kappa * r_t
    u = kappa * rho
    nmax = 2 * pmax
    ihat_s = np.empty(pmax + 1)
    ihat_t = np.empty(pmax + 1)
    khat_s = np.empty(pmax + 1)
    khat_t = np.empty(pmax + 1)
    rad = np.empty(nmax + 1)
    ihat_vals(pmax, a_s, ihat_s)
    ihat_vals(pmax, b_t, ihat_t)
    khat_only(pmax, a_s, khat_s)
    khat_only(pmax, b_t, khat_t)
    if u < 1e-10:
        # coincident centers: pure rescaling between the two normalizations
        for l in range(pmax + 1):
            if kind == M2M:
                scale = khat_t[l] / khat_s[l] * (a_s / b_t) * np.exp(a_s - b_t)
            elif kind == L2L:
                scale = ihat_t[l] / ihat_s[l] * np.exp(b_t - a_s)
            else:
                scale = np.nan  # M2L is never evaluated at zero separation
            for m in range(-l, l + 1):
                idx = l * l + l + m
                out[idx, idx] = scale
        return
    if kind == M2L:
        khat_u = np.empty(nmax + 1)
        khat_only(nmax, u, khat_u)
        efac = np.exp(a_s + b_t - u)
        for n in range(nmax + 1):
            rad[n] = khat_u[n]
    else:
        ihat_u = np.empty(nmax + 1)
        ihat_vals(nmax, u, ihat_u)
        for n in range(nmax + 1):
            rad[n] = ihat_u[n]
        if kind == M2M:
            efac = np.exp(a_s - b_t + u)
        else:
            efac = np.exp(b_t - a_s + u)
    for lp in range(pmax + 1):
        for l in range(pmax + 1):
            lmin = min(l, lp)
            for m in range(-lmin, lmin + 1):
                am = abs(m)
                ssum = 0.0
                ukk = u ** am
                for k in range(am, lmin + 1):
                    n = l + lp - k
                    if kind == M2L:
                        term = _ck(l, lp, am, k, fact) * rad[n] / ukk
                        if k % 2 == 1:
                            term = -term
                    else:
                        term = _ck(l, lp, am, k, fact) * rad[n] / ukk
                    ssum += term
                    ukk *= u
                if kind == M2M:
                    pref = _cn(l, lp, am, fact) * khat_t[lp] / khat_s[l] \
                        * (a_s / b_t) * efac
                elif kind == L2L:
                    pref = _cn(l, lp, am, fact) * ihat_t[lp] / ihat_s[l] * efac
                    if (l + lp) % 2 == 1:
                        pref = -pref
                else:
                    pref = _cn(l, lp, am, fact) * ihat_t[lp] * (a_s / u) \
                        * efac / khat_s[l]
                    if l % 2 == 1:
                        pref = -pref
                val = pref * ssum
                out[lp * lp + lp + m, l * l + l + m] = val


@njit(cache=True)
def _align_z(tx, ty, tz, rot):
    """Rotation matrix mapping the direction of t onto +z."""
    nrm = np.sqrt(tx * tx + ty * ty + tz * tz)
    vx = tx / nrm
    vy = ty / nrm
    vz = tz / nrm
    ax = abs(vx)
    ay = abs(vy)
    az = abs(vz)
    sx = 0.0
    sy = 0.0
    sz = 0.0
    if ax <= ay and ax <= az:
        sx = 1.0
    elif ay <= az:
        sy = 1.0
    else:
        sz = 1.0
    d = sx * vx + sy * vy + sz * vz
    t1x = sx - d * vx
    t1y = sy - d * vy
    t1z = sz - d * vz
    n1 = np.sqrt(t1x * t1x + t1y * t1y + t1z * t1z)
    t1x /= n1
    t1y /= n1
    t1z /= n1
    t2x = vy * t1z - vz * t1y
    t2y = vz * t1x - vx * t1z
    t2z = vx * t1y - vy * t1x
    rot[0, 0] = t1x
    rot[0, 1] = t1y
    rot[0, 2] = t1z
    rot[1, 0] = t2x
    rot[1, 1] = t2y
    rot[1, 2] = t2z
    rot[2, 0] = vx
    rot[2, 1] = vy
    rot[2, 2] = vz


@njit(cache=True)
def pair_operator(kind, tx, ty, tz, r_s, r_t, kappa, pmax, fact, out):
    """General-direction translation: rotate, translate along z, rotate back.

    ``(tx, ty, tz)`` is source center minus target center.
    """
    nb = (pmax + 1) * (pmax + 1)
    rho = np.sqrt(tx * tx + ty * ty + tz * tz)
    if rho < 1e-14:
        oz_fill(kind, 0.0, r_s, r_t, kappa, pmax, fact, out)
        return
    rot3 = np.empty((3, 3))
    _align_z(tx, ty, tz, rot3)
    dmat = np.zeros((nb, nb))
    _rotation_dense(rot3, pmax, nb, dmat)
    toz = np.empty((nb, nb))
    oz_fill(kind, rho, r_s, r_t, kappa, pmax, fact, toz)
    # out = D^T  (Toz (D in)) computed per degree block for the rotations
    tmp = np.empty((nb, nb))
    # tmp = Toz @ D  (D is block diagonal: column blocks)
    for lc in range(pmax + 1):
        c0 = lc * lc
        c1 = (lc + 1) * (lc + 1)
        for a in range(nb):
            for b in range(c0, c1):
                s = 0.0
                for c in range(c0, c1):
                    s += toz[a, c] * dmat[c, b]
                tmp[a, b] = s
    for lr in range(pmax + 1):
        r0 = lr * lr
        r1 = (lr + 1) * (lr + 1)
        for a in range(r0, r1):
            for b in range(nb):
                s = 0.0
                for c in range(r0, r1):
                    s += dmat[c, a] * tmp[c, b]
                out[a, b] = s


@njit(cache=True)
def grad_z_operator(kind, r_scale, kappa, pmax, fact, out):
    """d/drho of the z-axis translation at rho = 0, equal scales.

    Couples only degrees differing by one; the sole surviving radial
    derivative is 1/(2k+3)!! at k = min(l, l').
    """
    nb = (pmax + 1) * (pmax + 1)
    for a in range(nb):
        for b in range(nb):
            out[a, b] = 0.0
    x = kappa * r_scale
    ihat_x = np.empty(pmax + 2)
    khat_x = np.empty(pmax + 2)
    ihat_vals(pmax + 1, x, ihat_x)
    khat_only(pmax + 1, x, khat_x)
    for l in range(pmax + 1):
        for lp in range(pmax + 1):
            if abs(l - lp) != 1:
                continue
            k = min(l, lp)
            dfact = 1.0
            for j in range(1, 2 * k + 4, 2):
                dfact *= j
            for m in range(-k, k + 1):
                am = abs(m)
                base = _cn(l, lp, am, fact) * _ck(l, lp, am, k, fact) \
                    * kappa / dfact
                if kind == M2M:
                    val = base * khat_x[lp] / khat_x[l]
                else:
                    val = -base * ihat_x[lp] / ihat_x[l]
                out[lp * lp + lp + m, l * l + l + m] = val


# ---------------------------------------------------------------------------
# leaf passes: evaluate/accumulate regular (first-kind) expansions
# ---------------------------------------------------------------------------


@njit(cache=True)
def regular_eval(pmax, kappa, pointsf, mask, tgt_ptr, tgt_pts, centers,
                 scales, coeffs, norms, phi):
    """phi[p] += local expansion of its leaf, evaluated at the point.

    Group g holds the target points of leaf g with center/scale g.
    """
    nb = (pmax + 1) * (pmax + 1)
    P = np.zeros((pmax + 2, pmax + 2))
    cosm = np.empty(pmax + 1)
    sinm = np.empty(pmax + 1)
    ybuf = np.empty(nb)
    ibuf = np.empty(pmax + 1)
    ihat_c = np.empty(pmax + 1)
    ngroups = tgt_ptr.shape[0] - 1
    for g in range(ngroups):
        rc = scales[g]
        ihat_vals(pmax, kappa * rc, ihat_c)
        for tt in range(tgt_ptr[g], tgt_ptr[g + 1]):
            pt = tgt_pts[tt]
            if not mask[pt]:
                continue
            dx = pointsf[pt, 0] - centers[g, 0]
            dy = pointsf[pt, 1] - centers[g, 1]
            dz = pointsf[pt, 2] - centers[g, 2]
            dist = np.sqrt(dx * dx + dy * dy + dz * dz)
            if dist < 1e-300:
                phi[pt] += coeffs[g, 0] / (2.0 * np.sqrt(np.pi)) \
                    / (ihat_c[0] * np.exp(kappa * rc))
                continue
            ihat_vals(pmax, kappa * dist, ibuf)
            _ylm_point(pmax, dx / dist, dy / dist, dz / dist,
                       norms, P, cosm, sinm, ybuf)
            efac = np.exp(kappa * (dist - rc))
            acc = 0.0
            idx = 0
            for l in range(pmax + 1):
                pref = ibuf[l] / ihat_c[l] * efac
                for _ in range(2 * l + 1):
                    acc += coeffs[g, idx] * pref * ybuf[idx]
                    idx += 1
            phi[pt] += acc
    return phi


@njit(cache=True)
def regular_accum(pmax, kappa, pointsf, mask, tgt_ptr, tgt_pts, centers,
                  scales, weights, norms, acc):
    """Exact transpose of ``regular_eval``."""
    nb = (pmax + 1) * (pmax + 1)
    P = np.zeros((pmax + 2, pmax + 2))
    cosm = np.empty(pmax + 1)
    sinm = np.empty(pmax + 1)
    ybuf = np.empty(nb)
    ibuf = np.empty(pmax + 1)
    ihat_c = np.empty(pmax + 1)
    ngroups = tgt_ptr.shape[0] - 1
    for g in range(ngroups):
        rc = scales[g]
        ihat_vals(pmax, kappa * rc, ihat_c)
        for tt in range(tgt_ptr[g], tgt_ptr[g + 1]):
            pt = tgt_pts[tt]
            if not mask[pt]:
                continue
            w = weights[pt]
            if w == 0.0:
                continue
            dx = pointsf[pt, 0] - centers[g, 0]
            dy = pointsf[pt, 1] - centers[g, 1]
            dz = pointsf[pt, 2] - centers[g, 2]
            dist = np.sqrt(dx * dx + dy * dy + dz * dz)
            if dist < 1e-300:
                acc[g, 0] += w / (2.0 * np.sqrt(np.pi)) \
                    / (ihat_c[0] * np.exp(kappa * rc))
                continue
            ihat_vals(pmax, kappa * dist, ibuf)
            _ylm_point(pmax, dx / dist, dy / dist, dz / dist,
                       norms, P, cosm, sinm, ybuf)
            efac = np.exp(kappa * (dist - rc))
            idx = 0
            for l in range(pmax + 1):
                pref = w * ibuf[l] / ihat_c[l] * efac
                for _ in range(2 * l + 1):
                    acc[g, idx] += pref * ybuf[idx]
                    idx += 1
    return acc


@njit(cache=True)
def m2l_sweep(pair_t, pair_s, centers, radii, kappa, pmax, fact,
              multipoles, locals_):
    """Horizontal pass rebuilding each conversion operator in place.

    Keeps memory flat when the interaction list is too large to cache.
    """
    nb = (pmax + 1) * (pmax + 1)
    op = np.empty((nb, nb))
    for p in range(pair_t.shape[0]):
        t = pair_t[p]
        s = pair_s[p]
        pair_operator(M2L,
                      centers[s, 0] - centers[t, 0],
                      centers[s, 1] - centers[t, 1],
                      centers[s, 2] - centers[t, 2],
                      radii[s], radii[t], kappa, pmax, fact, op)
        for a in range(nb):
            acc = 0.0
            for b in range(nb):
                acc += op[a, b] * multipoles[s, b]
            locals_[t, a] += acc


@njit(cache=True)
def m2l_sweep_transpose(pair_t, pair_s, centers, radii, kappa, pmax, fact,
                        locals_adj, multi_adj):
    """Exact transpose of ``m2l_sweep`` (identical rebuilt operators)."""
    nb = (pmax + 1) * (pmax + 1)
    op = np.empty((nb, nb))
    for p in range(pair_t.shape[0]):
        t = pair_t[p]
        s = pair_s[p]
        pair_operator(M2L,
                      centers[s, 0] - centers[t, 0],
                      centers[s, 1] - centers[t, 1],
                      centers[s, 2] - centers[t, 2],
                      radii[s], radii[t], kappa, pmax, fact, op)
        for b in range(nb):
            acc = 0.0
            for a in range(nb):
                acc += op[a, b] * locals_adj[t, a]
            multi_adj[s, b] += acc
