"""Numba kernels for the discretized operators.

All loops are sequential with a fixed iteration order, so repeated runs
are bit-identical.  The Yukawa kernels operate on a CSR "target leaf ->
source sphere" structure; the dense direct path is the special case of
one leaf holding every sphere.
"""

import numpy as np
from numba import njit

from ._kernels import _ylm_grad_point, _ylm_point, ihat_fill, khat_fill


@njit(cache=True)
def khat_vals(lmax, x, vals):
    invx = 1.0 / x
    vals[0] = 1.0
    if lmax >= 1:
        vals[1] = 1.0 + invx
    for l in range(1, lmax):
        vals[l + 1] = vals[l - 1] + (2 * l + 1) * invx * vals[l]


# ---------------------------------------------------------------------------
# sparse blocks (Laplace / screened-Laplace neighbor coupling)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _source_basis(use_bessel, lmax, kappa, dist, rj, ihat_rj,
                  ex, ey, ez, norms, P, cosm, sinm, ybuf, ibuf, dibuf):
    """Fill ybuf[lm] = scale_l(dist) Y_lm(e) for source sphere of radius rj.

    scale is (dist/rj)^l for the Laplace block and the first-kind Bessel
    ratio i_l(kappa dist)/i_l(kappa rj) for the screened block.
    """
    _ylm_point(lmax, ex, ey, ez, norms, P, cosm, sinm, ybuf)
    if use_bessel:
        ihat_fill(lmax, kappa * dist, ibuf, dibuf)
        fac = np.exp(kappa * (dist - rj))
        idx = 0
        for l in range(lmax + 1):
            scale = ibuf[l] / ihat_rj[l] * fac
            for _ in range(2 * l + 1):
                ybuf[idx] *= scale
                idx += 1
    else:
        t = dist / rj
        idx = 0
        scale = 1.0
        for l in range(lmax + 1):
            for _ in range(2 * l + 1):
                ybuf[idx] *= scale
                idx += 1
            scale *= t
    return ybuf


@njit(cache=True)
def ab_forward(use_bessel, lmax, kappa, centers, radii, points,
               nbr_ptr, nbr_idx, pair_dist, pair_chi, dvals, ihat_r,
               norms, x_coeffs, tmp):
    """Neighbor-coupling potential at every quadrature point.

    tmp[i, n] = sum_{j in N_i} omega_ij(x_i^n) *
                sum_lm scale_l Y_lm(e_j) x_coeffs[j, lm]
    """
    m, nleb = tmp.shape
    nb = (lmax + 1) * (lmax + 1)
    P = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    ibuf = np.empty(lmax + 1)
    dibuf = np.empty(lmax + 1)
    for i in range(m):
        for n in range(nleb):
            tmp[i, n] = 0.0
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_idx[p]
            rj = radii[j]
            for n in range(nleb):
                cv = pair_chi[p, n]
                if cv == 0.0:
                    continue
                w = dvals[i, n] * cv
                dist = max(pair_dist[p, n], 1e-30)
                ex = (points[i, n, 0] - centers[j, 0]) / dist
                ey = (points[i, n, 1] - centers[j, 1]) / dist
                ez = (points[i, n, 2] - centers[j, 2]) / dist
                _source_basis(use_bessel, lmax, kappa, dist, rj, ihat_r[j],
                              ex, ey, ez, norms, P, cosm, sinm, ybuf, ibuf, dibuf)
                s = 0.0
                for lm in range(nb):
                    s += ybuf[lm] * x_coeffs[j, lm]
                tmp[i, n] += w * s
    return tmp


@njit(cache=True)
def ab_adjoint(use_bessel, lmax, kappa, centers, radii, points,
               nbr_ptr, nbr_idx, pair_dist, pair_chi, dvals, ihat_r,
               norms, weighted_syn, out):
    """Transpose of ``ab_forward``: scatter weighted point values onto the
    source-sphere coefficients.  ``weighted_syn[i, n]`` must already hold
    w_n * (synthesized adjoint value)."""
    m = out.shape[0]
    nb = (lmax + 1) * (lmax + 1)
    nleb = points.shape[1]
    P = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    ibuf = np.empty(lmax + 1)
    dibuf = np.empty(lmax + 1)
    for i in range(m):
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_idx[p]
            rj = radii[j]
            for n in range(nleb):
                cv = pair_chi[p, n]
                if cv == 0.0:
                    continue
                w = dvals[i, n] * cv * weighted_syn[i, n]
                if w == 0.0:
                    continue
                dist = max(pair_dist[p, n], 1e-30)
                ex = (points[i, n, 0] - centers[j, 0]) / dist
                ey = (points[i, n, 1] - centers[j, 1]) / dist
                ez = (points[i, n, 2] - centers[j, 2]) / dist
                _source_basis(use_bessel, lmax, kappa, dist, rj, ihat_r[j],
                              ex, ey, ez, norms, P, cosm, sinm, ybuf, ibuf, dibuf)
                for lm in range(nb):
                    out[j, lm] += w * ybuf[lm]
    return out


@njit(cache=True)
def ab_blocks(use_bessel, lmax, kappa, centers, radii, points,
              nbr_ptr, nbr_idx, pair_dist, pair_chi, dvals, ihat_r,
              norms, lebw, ygrid, blocks):
    """Assemble the per-pair dense coupling blocks (incore mode).

    blocks[p, lm, l'm'] = sum_n w_n omega_ij(x_i^n) Y_lm(s_n)
                          scale_l' Y_l'm'(e_j)
    """
    m = centers.shape[0]
    nb = (lmax + 1) * (lmax + 1)
    nleb = points.shape[1]
    P = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    ibuf = np.empty(lmax + 1)
    dibuf = np.empty(lmax + 1)
    for i in range(m):
        for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_idx[p]
            rj = radii[j]
            for a in range(nb):
                for b in range(nb):
                    blocks[p, a, b] = 0.0
            for n in range(nleb):
                cv = pair_chi[p, n]
                if cv == 0.0:
                    continue
                w = lebw[n] * dvals[i, n] * cv
                dist = max(pair_dist[p, n], 1e-30)
                ex = (points[i, n, 0] - centers[j, 0]) / dist
                ey = (points[i, n, 1] - centers[j, 1]) / dist
                ez = (points[i, n, 2] - centers[j, 2]) / dist
                _source_basis(use_bessel, lmax, kappa, dist, rj, ihat_r[j],
                              ex, ey, ez, norms, P, cosm, sinm, ybuf, ibuf, dibuf)
                for a in range(nb):
                    fa = w * ygrid[n, a]
                    if fa == 0.0:
                        continue
                    for b in range(nb):
                        blocks[p, a, b] += fa * ybuf[b]
    return blocks


# ---------------------------------------------------------------------------
# Yukawa single-layer sums (dense coupling + right-hand sides)
# ---------------------------------------------------------------------------


@njit(cache=True)
def yukawa_eval(lmax, kappa, pointsf, mask, tgt_ptr, tgt_pts, src_ptr, src_idx,
                centers, radii, khat_r, coeffs, norms, phi):
    """phi[p] += sum over listed sources of the outgoing-basis expansion.

    Group g pairs target points tgt_pts[tgt_ptr[g]:tgt_ptr[g+1]] with
    source spheres src_idx[src_ptr[g]:src_ptr[g+1]].
    """
    nb = (lmax + 1) * (lmax + 1)
    P = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    kbuf = np.empty(lmax + 1)
    dmin = 1e300
    ngroups = tgt_ptr.shape[0] - 1
    for g in range(ngroups):
        for tt in range(tgt_ptr[g], tgt_ptr[g + 1]):
            pt = tgt_pts[tt]
            if not mask[pt]:
                continue
            px = pointsf[pt, 0]
            py = pointsf[pt, 1]
            pz = pointsf[pt, 2]
            acc = 0.0
            for ss in range(src_ptr[g], src_ptr[g + 1]):
                j = src_idx[ss]
                dx = px - centers[j, 0]
                dy = py - centers[j, 1]
                dz = pz - centers[j, 2]
                dist = np.sqrt(dx * dx + dy * dy + dz * dz)
                if dist < dmin:
                    dmin = dist
                    if dmin < 1e-10:
                        dist = 1e-10
                u = kappa * dist
                khat_vals(lmax, u, kbuf)
                _ylm_point(lmax, dx / dist, dy / dist, dz / dist,
                           norms, P, cosm, sinm, ybuf)
                rj = radii[j]
                efac = rj / dist * np.exp(kappa * (rj - dist))
                idx = 0
                for l in range(lmax + 1):
                    pref = kbuf[l] / khat_r[j, l] * efac
                    for _ in range(2 * l + 1):
                        acc += coeffs[j, idx] * pref * ybuf[idx]
                        idx += 1
            phi[pt] += acc
    return dmin


@njit(cache=True)
def yukawa_accum(lmax, kappa, pointsf, mask, tgt_ptr, tgt_pts, src_ptr, src_idx,
                 centers, radii, khat_r, weights, norms, acc):
    """Exact transpose of ``yukawa_eval``: acc[j, lm] += w_p basis(p; j, lm)."""
    nb = (lmax + 1) * (lmax + 1)
    P = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    kbuf = np.empty(lmax + 1)
    ngroups = tgt_ptr.shape[0] - 1
    for g in range(ngroups):
        for tt in range(tgt_ptr[g], tgt_ptr[g + 1]):
            pt = tgt_pts[tt]
            if not mask[pt]:
                continue
            w = weights[pt]
            if w == 0.0:
                continue
            px = pointsf[pt, 0]
            py = pointsf[pt, 1]
            pz = pointsf[pt, 2]
            for ss in range(src_ptr[g], src_ptr[g + 1]):
                j = src_idx[ss]
                dx = px - centers[j, 0]
                dy = py - centers[j, 1]
                dz = pz - centers[j, 2]
                dist = max(np.sqrt(dx * dx + dy * dy + dz * dz), 1e-10)
                u = kappa * dist
                khat_vals(lmax, u, kbuf)
                _ylm_point(lmax, dx / dist, dy / dist, dz / dist,
                           norms, P, cosm, sinm, ybuf)
                rj = radii[j]
                efac = rj / dist * np.exp(kappa * (rj - dist))
                idx = 0
                for l in range(lmax + 1):
                    pref = w * kbuf[l] / khat_r[j, l] * efac
                    for _ in range(2 * l + 1):
                        acc[j, idx] += pref * ybuf[idx]
                        idx += 1
    return acc


@njit(cache=True)
def yukawa_eval_grad(lmax, kappa, pointsf, mask, tgt_ptr, tgt_pts, src_ptr,
                     src_idx, centers, radii, khat_r, coeffs, norms,
                     phi, gphi):
    """Forward evaluation plus the spatial gradient of the field."""
    nb = (lmax + 1) * (lmax + 1)
    P = np.zeros((lmax + 2, lmax + 2))
    U = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    gbuf = np.empty((nb, 3))
    kbuf = np.empty(lmax + 1)
    dkbuf = np.empty(lmax + 1)
    ngroups = tgt_ptr.shape[0] - 1
    for g in range(ngroups):
        for tt in range(tgt_ptr[g], tgt_ptr[g + 1]):
            pt = tgt_pts[tt]
            if not mask[pt]:
                continue
            px = pointsf[pt, 0]
            py = pointsf[pt, 1]
            pz = pointsf[pt, 2]
            for ss in range(src_ptr[g], src_ptr[g + 1]):
                j = src_idx[ss]
                dx = px - centers[j, 0]
                dy = py - centers[j, 1]
                dz = pz - centers[j, 2]
                dist = max(np.sqrt(dx * dx + dy * dy + dz * dz), 1e-10)
                u = kappa * dist
                khat_fill(lmax, u, kbuf, dkbuf)
                ex = dx / dist
                ey = dy / dist
                ez = dz / dist
                _ylm_grad_point(lmax, ex, ey, ez, norms, P, U, cosm, sinm,
                                ybuf, gbuf)
                rj = radii[j]
                efac = rj / dist * np.exp(kappa * (rj - dist))
                idx = 0
                for l in range(lmax + 1):
                    pref = kbuf[l] / khat_r[j, l] * efac
                    dpref = kappa * dkbuf[l] / khat_r[j, l] * efac
                    for _ in range(2 * l + 1):
                        c = coeffs[j, idx]
                        phi[pt] += c * pref * ybuf[idx]
                        gphi[pt, 0] += c * (dpref * ex * ybuf[idx]
                                            + pref * gbuf[idx, 0] / dist)
                        gphi[pt, 1] += c * (dpref * ey * ybuf[idx]
                                            + pref * gbuf[idx, 1] / dist)
                        gphi[pt, 2] += c * (dpref * ez * ybuf[idx]
                                            + pref * gbuf[idx, 2] / dist)
                        idx += 1
    return phi


@njit(cache=True)
def yukawa_accum_grad(lmax, kappa, pointsf, mask, tgt_ptr, tgt_pts, src_ptr,
                      src_idx, centers, radii, khat_r, weights, norms,
                      acc, gacc):
    """Transpose accumulation plus its derivative w.r.t. the source center.

    gacc[j, lm, :] = d(acc[j, lm])/d(center_j)
                   = - sum_p w_p grad_x basis(p; j, lm).
    """
    nb = (lmax + 1) * (lmax + 1)
    P = np.zeros((lmax + 2, lmax + 2))
    U = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    gbuf = np.empty((nb, 3))
    kbuf = np.empty(lmax + 1)
    dkbuf = np.empty(lmax + 1)
    ngroups = tgt_ptr.shape[0] - 1
    for g in range(ngroups):
        for tt in range(tgt_ptr[g], tgt_ptr[g + 1]):
            pt = tgt_pts[tt]
            if not mask[pt]:
                continue
            w = weights[pt]
            if w == 0.0:
                continue
            px = pointsf[pt, 0]
            py = pointsf[pt, 1]
            pz = pointsf[pt, 2]
            for ss in range(src_ptr[g], src_ptr[g + 1]):
                j = src_idx[ss]
                dx = px - centers[j, 0]
                dy = py - centers[j, 1]
                dz = pz - centers[j, 2]
                dist = max(np.sqrt(dx * dx + dy * dy + dz * dz), 1e-10)
                u = kappa * dist
                khat_fill(lmax, u, kbuf, dkbuf)
                ex = dx / dist
                ey = dy / dist
                ez = dz / dist
                _ylm_grad_point(lmax, ex, ey, ez, norms, P, U, cosm, sinm,
                                ybuf, gbuf)
                rj = radii[j]
                efac = rj / dist * np.exp(kappa * (rj - dist))
                idx = 0
                for l in range(lmax + 1):
                    pref = w * kbuf[l] / khat_r[j, l] * efac
                    dpref = w * kappa * dkbuf[l] / khat_r[j, l] * efac
                    for _ in range(2 * l + 1):
                        acc[j, idx] += pref * ybuf[idx]
                        gacc[j, idx, 0] -= (dpref * ex * ybuf[idx]
                                            + pref * gbuf[idx, 0] / dist)
                        gacc[j, idx, 1] -= (dpref * ey * ybuf[idx]
                                            + pref * gbuf[idx, 1] / dist)
                        gacc[j, idx, 2] -= (dpref * ez * ybuf[idx]
                                            + pref * gbuf[idx, 2] / dist)
                        idx += 1
    return acc


# ---------------------------------------------------------------------------
# vacuum potential of the point charges and its normal derivative
# ---------------------------------------------------------------------------


@njit(cache=True)
def psi0_values(pointsf, mask, centers, charges, eps1, out):
    """out[p] = sum_j q_j / (eps1 |x_p - x_j|); returns min distance seen."""
    npts = pointsf.shape[0]
    m = centers.shape[0]
    dmin = 1e300
    for p in range(npts):
        if not mask[p]:
            out[p] = 0.0
            continue
        acc = 0.0
        for j in range(m):
            dx = pointsf[p, 0] - centers[j, 0]
            dy = pointsf[p, 1] - centers[j, 1]
            dz = pointsf[p, 2] - centers[j, 2]
            dist = np.sqrt(dx * dx + dy * dy + dz * dz)
            if dist < dmin:
                dmin = dist
            acc += charges[j] / dist
        out[p] = acc / eps1
    return dmin


@njit(cache=True)
def psi0_normal_deriv(points, mask, normals, centers, charges, eps1, out):
    """out[i, n] = d psi0 / d normal at x_i^n with outward normal s_n."""
    m_t = points.shape[0]
    nleb = points.shape[1]
    m = centers.shape[0]
    dmin = 1e300
    for i in range(m_t):
        for n in range(nleb):
            if not mask[i * nleb + n]:
                out[i, n] = 0.0
                continue
            acc = 0.0
            for j in range(m):
                dx = points[i, n, 0] - centers[j, 0]
                dy = points[i, n, 1] - centers[j, 1]
                dz = points[i, n, 2] - centers[j, 2]
                dist = np.sqrt(dx * dx + dy * dy + dz * dz)
                if dist < dmin:
                    dmin = dist
                dn = dx * normals[n, 0] + dy * normals[n, 1] + dz * normals[n, 2]
                acc -= charges[j] * dn / (dist * dist * dist)
            out[i, n] = acc / eps1
    return dmin
