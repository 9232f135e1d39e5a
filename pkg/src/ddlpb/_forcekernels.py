"""Numba kernels for the adjoint force contractions.

Each kernel accumulates one family of energy-derivative terms into a
per-atom gradient array.  All position dependencies follow the chain
rule through the quadrature points (a sphere's points move rigidly with
its center), and every family individually sums to zero over all atoms,
which is what makes the total gradient translation-free.
"""

import numpy as np
from numba import njit

from ._kernels import _ylm_grad_point, ihat_fill


@njit(cache=True)
def dab_contract(lmax, kappa, centers, radii, points,
                 nbr_ptr, nbr_idx, pair_dist, pair_chi, pair_chi_prime,
                 fvals, dvals, zvec, ihat_r, norms, lebw,
                 za_syn, zb_syn, x_r, x_e, grad):
    """Contraction of the sparse-block derivatives with the adjoint.

    Accumulates S[k] = sum w_n z_i(n) grad_k(omega_ij u_j) over both the
    radial-scaled (reaction) and Bessel-scaled (extension) families;
    the caller applies the overall -1/2 sign convention.
    """
    m = centers.shape[0]
    nleb = points.shape[1]
    nb = (lmax + 1) * (lmax + 1)
    P = np.zeros((lmax + 2, lmax + 2))
    U = np.zeros((lmax + 2, lmax + 2))
    cosm = np.empty(lmax + 1)
    sinm = np.empty(lmax + 1)
    ybuf = np.empty(nb)
    gbuf = np.empty((nb, 3))
    ibuf = np.empty(lmax + 1)
    dibuf = np.empty(lmax + 1)
    rad = np.empty(lmax + 1)
    drad = np.empty(lmax + 1)
    irat = np.empty(lmax + 1)
    dirat = np.empty(lmax + 1)
    # per-neighbor scratch for the coverage-derivative (third) case
    nmax = 0
    for i in range(m):
        if nbr_ptr[i + 1] - nbr_ptr[i] > nmax:
            nmax = nbr_ptr[i + 1] - nbr_ptr[i]
    u_tot = np.empty(nmax)
    for i in range(m):
        deg = nbr_ptr[i + 1] - nbr_ptr[i]
        if deg == 0:
            continue
        for n in range(nleb):
            za = za_syn[i, n]
            zb = zb_syn[i, n]
            if za == 0.0 and zb == 0.0:
                continue
            w = lebw[n]
            dv = dvals[i, n]
            buried = fvals[i, n] > 1.0
            px = points[i, n, 0]
            py = points[i, n, 1]
            pz = points[i, n, 2]
            # combined omega-weighted source values for the delta term
            t_sum = 0.0
            for c, p in enumerate(range(nbr_ptr[i], nbr_ptr[i + 1])):
                j = nbr_idx[p]
                rj = radii[j]
                dist = pair_dist[p, n]
                ex = (px - centers[j, 0]) / dist
                ey = (py - centers[j, 1]) / dist
                ez = (pz - centers[j, 2]) / dist
                _ylm_grad_point(lmax, ex, ey, ez, norms, P, U, cosm, sinm,
                                ybuf, gbuf)
                # radial scalings and their d/d(dist) derivatives
                t = dist / rj
                rr = 1.0
                for l in range(lmax + 1):
                    rad[l] = rr
                    drad[l] = l * rr / dist
                    rr *= t
                ihat_fill(lmax, kappa * dist, ibuf, dibuf)
                efac = np.exp(kappa * (dist - rj))
                for l in range(lmax + 1):
                    irat[l] = ibuf[l] / ihat_r[j, l] * efac
                    dirat[l] = kappa * dibuf[l] / ihat_r[j, l] * efac
                # field value u and its spatial gradient for both blocks
                ua = 0.0
                ub = 0.0
                gax = gay = gaz = 0.0
                gbx = gby = gbz = 0.0
                idx = 0
                for l in range(lmax + 1):
                    for _ in range(2 * l + 1):
                        ca = x_r[j, idx]
                        cb = x_e[j, idx]
                        yv = ybuf[idx]
                        ua += ca * rad[l] * yv
                        ub += cb * irat[l] * yv
                        gax += ca * (drad[l] * ex * yv + rad[l] * gbuf[idx, 0] / dist)
                        gay += ca * (drad[l] * ey * yv + rad[l] * gbuf[idx, 1] / dist)
                        gaz += ca * (drad[l] * ez * yv + rad[l] * gbuf[idx, 2] / dist)
                        gbx += cb * (dirat[l] * ex * yv + irat[l] * gbuf[idx, 0] / dist)
                        gby += cb * (dirat[l] * ey * yv + irat[l] * gbuf[idx, 1] / dist)
                        gbz += cb * (dirat[l] * ez * yv + irat[l] * gbuf[idx, 2] / dist)
                        idx += 1
                cv = pair_chi[p, n]
                cd = pair_chi_prime[p, n]
                om = dv * cv
                zsum = w * (za * ua + zb * ub)
                u_tot[c] = zsum
                t_sum += zsum * om
                # switching-derivative parts along e_j (k = i and k = j)
                base = dv * cd / rj
                si = w * (za * ua + zb * ub) * base
                grad[i, 0] += si * ex
                grad[i, 1] += si * ey
                grad[i, 2] += si * ez
                sj = si
                if buried:
                    sj *= (1.0 - om)
                grad[j, 0] -= sj * ex
                grad[j, 1] -= sj * ey
                grad[j, 2] -= sj * ez
                # source-basis motion (k = i gains, k = j loses)
                gx = w * om * (za * gax + zb * gbx)
                gy = w * om * (za * gay + zb * gby)
                gz = w * om * (za * gaz + zb * gbz)
                grad[i, 0] += gx
                grad[i, 1] += gy
                grad[i, 2] += gz
                grad[j, 0] -= gx
                grad[j, 1] -= gy
                grad[j, 2] -= gz
            if buried:
                # coverage-normalization derivative: the own-center part
                # carries the full coverage gradient, each neighbor k the
                # coverage-weighted sum over the remaining neighbors
                s = dv * t_sum
                grad[i, 0] -= s * zvec[i, n, 0]
                grad[i, 1] -= s * zvec[i, n, 1]
                grad[i, 2] -= s * zvec[i, n, 2]
                for c, p in enumerate(range(nbr_ptr[i], nbr_ptr[i + 1])):
                    k = nbr_idx[p]
                    cdk = pair_chi_prime[p, n]
                    if cdk == 0.0:
                        continue
                    dist = pair_dist[p, n]
                    om_k = dv * pair_chi[p, n]
                    fac = (dv * cdk / (radii[k] * dist)
                           * (t_sum - u_tot[c] * om_k))
                    grad[k, 0] += fac * (px - centers[k, 0])
                    grad[k, 1] += fac * (py - centers[k, 1])
                    grad[k, 2] += fac * (pz - centers[k, 2])
    return grad


@njit(cache=True)
def exposure_gradient_contract(centers, radii, points, nbr_ptr, nbr_idx,
                               pair_dist, pair_chi_prime, fvals, zvec,
                               values, grad):
    """Accumulate grad[k] += sum_{i,n} values[i,n] grad_k chi_i(x_i^n)."""
    m = centers.shape[0]
    nleb = points.shape[1]
    for i in range(m):
        for n in range(nleb):
            s = values[i, n]
            if s == 0.0 or fvals[i, n] > 1.0:
                continue
            grad[i, 0] -= s * zvec[i, n, 0]
            grad[i, 1] -= s * zvec[i, n, 1]
            grad[i, 2] -= s * zvec[i, n, 2]
            for p in range(nbr_ptr[i], nbr_ptr[i + 1]):
                cd = pair_chi_prime[p, n]
                if cd == 0.0:
                    continue
                k = nbr_idx[p]
                fac = s * cd / (radii[k] * pair_dist[p, n])
                grad[k, 0] += fac * (points[i, n, 0] - centers[k, 0])
                grad[k, 1] += fac * (points[i, n, 1] - centers[k, 1])
                grad[k, 2] += fac * (points[i, n, 2] - centers[k, 2])
    return grad


@njit(cache=True)
def coulomb_field_contract(pointsf, mask, weights, owner, centers, charges,
                           eps1, grad):
    """Charge-field force pairs through the vacuum potential.

    weights[p] multiplies grad_k psi0(x_p); the owner sphere gains the
    summed field of all other charges, each source charge the opposite.
    """
    npts = pointsf.shape[0]
    m = centers.shape[0]
    for p in range(npts):
        w = weights[p]
        if w == 0.0 or not mask[p]:
            continue
        i = owner[p]
        for j in range(m):
            if j == i:
                continue
            dx = pointsf[p, 0] - centers[j, 0]
            dy = pointsf[p, 1] - centers[j, 1]
            dz = pointsf[p, 2] - centers[j, 2]
            r2 = dx * dx + dy * dy + dz * dz
            r = np.sqrt(r2)
            f = w * charges[j] / (eps1 * r2 * r)
            tx = f * dx
            ty = f * dy
            tz = f * dz
            grad[i, 0] += tx
            grad[i, 1] += ty
            grad[i, 2] += tz
            grad[j, 0] -= tx
            grad[j, 1] -= ty
            grad[j, 2] -= tz
    return grad


@njit(cache=True)
def coulomb_hessian_contract(points, mask, weights, normals, centers, charges,
                             eps1, grad):
    """Charge-field-gradient force pairs through the vacuum flux.

    weights[j, n] multiplies grad_k of the normal derivative of psi0 at
    x_j^n; the dipole-like kernel couples the owner sphere j with every
    other charge l in equal and opposite pairs.
    """
    m_t = points.shape[0]
    nleb = points.shape[1]
    m = centers.shape[0]
    for j in range(m_t):
        for n in range(nleb):
            w = weights[j, n]
            if w == 0.0 or not mask[j * nleb + n]:
                continue
            nx = normals[n, 0]
            ny = normals[n, 1]
            nz = normals[n, 2]
            for l in range(m):
                if l == j:
                    continue
                dx = points[j, n, 0] - centers[l, 0]
                dy = points[j, n, 1] - centers[l, 1]
                dz = points[j, n, 2] - centers[l, 2]
                r2 = dx * dx + dy * dy + dz * dz
                r = np.sqrt(r2)
                r3 = r2 * r
                dn = dx * nx + dy * ny + dz * nz
                c3 = 3.0 * dn / (r2 * r3)
                f = w * charges[l] / eps1
                tx = f * (c3 * dx - nx / r3)
                ty = f * (c3 * dy - ny / r3)
                tz = f * (c3 * dz - nz / r3)
                grad[j, 0] += tx
                grad[j, 1] += ty
                grad[j, 2] += tz
                grad[l, 0] -= tx
                grad[l, 1] -= ty
                grad[l, 2] -= tz
    return grad
