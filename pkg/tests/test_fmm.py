"""Fast-multipole translations, tree structure, and engine equivalence."""

import numpy as np
import pytest

from helpers import chain_cluster, uniform_cloud

from ddlpb.bessel import bessel_i, bessel_k
from ddlpb.cavity import SwitchParams, build_cavity
from ddlpb.errors import DomainError
from ddlpb.fmm import (FarField, build_tree, grad_translations_at_zero, l2l,
                       m2l, m2m, translation_operator)
from ddlpb.harmonics import HarmonicBasis, basis_index, basis_size, eval_harmonics
from ddlpb.lebgrid import lebedev
from ddlpb.operators import (OperatorContext, apply_system,
                             apply_system_adjoint)
from ddlpb.state import StateVector

RNG = np.random.default_rng(555)
KAPPA = 0.104


def eval_outgoing(coeffs, center, scale, kappa, pmax, pts):
    """Direct evaluation of an outgoing (second-kind) expansion."""
    basis = HarmonicBasis(pmax)
    out = np.zeros(len(pts))
    kv_scale, _ = bessel_k(pmax, kappa * scale)
    for w, x in enumerate(pts):
        rel = x - center
        d = np.linalg.norm(rel)
        kv, _ = bessel_k(pmax, kappa * d)
        y = eval_harmonics(basis, rel / d)
        for l in range(pmax + 1):
            for m in range(-l, l + 1):
                idx = basis_index(l, m)
                out[w] += coeffs[idx] * kv[l] / kv_scale[l] * y[idx]
    return out


def eval_incoming(coeffs, center, scale, kappa, pmax, pts):
    """Direct evaluation of an incoming (first-kind) expansion."""
    basis = HarmonicBasis(pmax)
    out = np.zeros(len(pts))
    iv_scale, _ = bessel_i(pmax, kappa * scale)
    for w, x in enumerate(pts):
        rel = x - center
        d = np.linalg.norm(rel)
        iv, _ = bessel_i(pmax, kappa * d)
        y = eval_harmonics(basis, rel / d)
        for l in range(pmax + 1):
            for m in range(-l, l + 1):
                idx = basis_index(l, m)
                out[w] += coeffs[idx] * iv[l] / iv_scale[l] * y[idx]
    return out


def random_units(n):
    v = RNG.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# translation operators against direct kernel evaluation
# ---------------------------------------------------------------------------

def test_m2m_identity_at_zero_shift():
    op = translation_operator("m2m", np.zeros(3), 1.5, 1.5, KAPPA, 8)
    assert np.max(np.abs(op - np.eye(basis_size(8)))) < 1e-12


def test_l2l_identity_at_zero_shift():
    op = translation_operator("l2l", np.zeros(3), 2.0, 2.0, KAPPA, 6)
    assert np.max(np.abs(op - np.eye(basis_size(6)))) < 1e-12


def test_m2m_matches_direct_kernel():
    pmax = 20
    c_s = np.array([0.3, -0.2, 0.5])
    c_t = np.array([-0.8, 0.6, -0.4])
    r_s, r_t = 1.0, 2.5
    src = np.zeros(basis_size(pmax))
    src[:basis_size(3)] = RNG.normal(size=basis_size(3))
    moved = m2m(c_s - c_t, r_s, r_t, KAPPA, pmax, src)
    pts = c_t + 40.0 * random_units(50)
    ref = eval_outgoing(src, c_s, r_s, KAPPA, pmax, pts)
    got = eval_outgoing(moved, c_t, r_t, KAPPA, pmax, pts)
    assert np.max(np.abs(got - ref)) < 1e-10 * max(np.max(np.abs(ref)), 1e-12)


def test_m2m_composition_group_property():
    # truncated operators compose exactly on content that leaves enough
    # degree headroom; the high-degree tail differs by truncation only
    pmax = 14
    r = (1.0, 1.7, 2.4)
    sa = RNG.normal(size=3) * 0.6
    sb = RNG.normal(size=3) * 0.6
    one = translation_operator("m2m", sa + sb, r[0], r[2], KAPPA, pmax)
    two = (translation_operator("m2m", sb, r[1], r[2], KAPPA, pmax)
           @ translation_operator("m2m", sa, r[0], r[1], KAPPA, pmax))
    nb3 = basis_size(3)
    scale = np.max(np.abs(one))
    assert np.max(np.abs((one - two)[:, :nb3])) < 1e-7 * scale
    low = slice(0, nb3)
    assert np.max(np.abs((one - two)[low, low])) < 1e-12 * np.max(np.abs(one[low, low]))


def test_m2l_matches_direct_kernel():
    pmax = 16
    c_s = np.array([0.0, 0.0, 0.0])
    c_t = np.array([6.0, 3.0, -4.0])  # separation ~ 3 (r_s + r_t)
    r_s, r_t = 1.2, 1.4
    src = np.zeros(basis_size(pmax))
    src[:basis_size(2)] = RNG.normal(size=basis_size(2))
    loc = m2l(c_s - c_t, r_s, r_t, KAPPA, pmax, src)
    pts = c_t + r_t * 0.8 * random_units(50)
    ref = eval_outgoing(src, c_s, r_s, KAPPA, pmax, pts)
    got = eval_incoming(loc, c_t, r_t, KAPPA, pmax, pts)
    assert np.max(np.abs(got - ref)) < 1e-8 * np.max(np.abs(ref))


def test_m2l_rejects_overlapping_balls():
    with pytest.raises(DomainError):
        m2l(np.array([1.0, 0, 0]), 1.0, 1.0, KAPPA, 4,
            np.zeros(basis_size(4)))


def test_m2l_truncation_error_decays_geometrically():
    c_s = np.zeros(3)
    c_t = np.array([0.0, 0.0, 7.5])
    r_s = r_t = 1.25
    nb2 = basis_size(2)
    src2 = RNG.normal(size=nb2)
    pts = c_t + r_t * 0.9 * random_units(30)
    ref = eval_outgoing(np.concatenate([src2, np.zeros(basis_size(24) - nb2)]),
                        c_s, r_s, KAPPA, 24, pts)
    errs = []
    for pmax in (4, 8, 12, 16, 20):
        src = np.zeros(basis_size(pmax))
        src[:nb2] = src2
        loc = m2l(c_s - c_t, r_s, r_t, KAPPA, pmax, src)
        got = eval_incoming(loc, c_t, r_t, KAPPA, pmax, pts)
        errs.append(np.max(np.abs(got - ref)))
    errs = np.array(errs)
    assert np.all(errs[1:] < errs[:-1] * 0.25)


def test_l2l_matches_direct_kernel():
    pmax = 14
    c_s = np.array([1.0, -0.5, 0.2])
    c_t = c_s + np.array([0.4, 0.3, -0.2])
    r_s, r_t = 3.0, 1.5
    loc = np.zeros(basis_size(pmax))
    loc[:basis_size(3)] = RNG.normal(size=basis_size(3))
    moved = l2l(c_s - c_t, r_s, r_t, KAPPA, pmax, loc)
    pts = c_t + r_t * 0.5 * random_units(40)
    ref = eval_incoming(loc, c_s, r_s, KAPPA, pmax, pts)
    got = eval_incoming(moved, c_t, r_t, KAPPA, pmax, pts)
    assert np.max(np.abs(got - ref)) < 1e-9 * np.max(np.abs(ref))


# ---------------------------------------------------------------------------
# differentiated translations at zero shift
# ---------------------------------------------------------------------------

def test_grad_translation_sparsity_and_value():
    pmax = 5
    gx, gy, gz = grad_translations_at_zero("m2m", 1.3, KAPPA, pmax)
    degs = np.repeat(np.arange(pmax + 1), 2 * np.arange(pmax + 1) + 1)
    for mat in (gz,):
        for a in range(basis_size(pmax)):
            for b in range(basis_size(pmax)):
                if abs(degs[a] - degs[b]) != 1:
                    assert mat[a, b] == 0.0
    # the degree 0 -> 1 entry of the z derivative carries 1/3!! = 1/3
    kv, _ = bessel_k(1, KAPPA * 1.3)
    expect = np.sqrt(3.0) * (kv[1] / kv[0]) * KAPPA / 3.0
    got = gz[basis_index(1, 0), basis_index(0, 0)]
    assert abs(got - expect) < 1e-13 * abs(expect)


@pytest.mark.parametrize("kind", ["m2m", "l2l"])
def test_grad_translation_matches_fd_of_translation(kind):
    pmax = 6
    r = 1.4
    gx, gy, gz = grad_translations_at_zero(kind, r, KAPPA, pmax)
    for axis, g in ((0, gx), (1, gy), (2, gz)):
        h = 1e-6
        shift = np.zeros(3)
        shift[axis] = h
        tp = translation_operator(kind, shift, r, r, KAPPA, pmax)
        tm = translation_operator(kind, -shift, r, r, KAPPA, pmax)
        fd = (tp - tm) / (2 * h)
        assert np.max(np.abs(fd - g)) < 1e-7, (kind, axis)


# ---------------------------------------------------------------------------
# tree
# ---------------------------------------------------------------------------

def test_single_sphere_tree():
    s = chain_cluster(1, seed=0)
    tree = build_tree(s)
    assert len(tree.nodes) == 1
    assert tree.nodes[0].far == []
    assert tree.nodes[0].near == [0]


def test_tree_depth_logarithmic():
    s = uniform_cloud(1000, seed=1)
    tree = build_tree(s, leaf_size=8)
    assert tree.depth() <= 2 * int(np.ceil(np.log2(1000 / 8))) + 2
    # every sphere in exactly one leaf
    owned = np.concatenate([tree.perm[tree.nodes[li].lo:tree.nodes[li].hi]
                            for li in tree.leaves])
    assert sorted(owned) == list(range(1000))


def test_two_distant_clusters_far_at_top():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(8, 3)) + np.array([0.0, 0, 0])
    b = rng.normal(size=(8, 3)) + np.array([200.0, 0, 0])
    from ddlpb.cavity import Solute
    s = Solute(np.vstack([a, b]), np.full(16, 1.5), np.zeros(16))
    tree = build_tree(s, leaf_size=8)
    far_pairs = [(t, src) for t, n in enumerate(tree.nodes) for src in n.far]
    assert (1, 2) in far_pairs and (2, 1) in far_pairs
    near_pairs = [(t, src) for t, n in enumerate(tree.nodes) for src in n.near]
    assert (0, 0) not in near_pairs  # root was split, never paired with itself


# ---------------------------------------------------------------------------
# engine vs direct backend
# ---------------------------------------------------------------------------

def make_pair(solute, lmax, pmax, nleb=50):
    cav = build_cavity(solute, SwitchParams(0.1), lebedev(nleb))
    direct = OperatorContext(cav, lmax, mode="incore")
    cav2 = build_cavity(solute, SwitchParams(0.1), lebedev(nleb))
    accel = OperatorContext(cav2, lmax, mode="incore",
                            farfield=FarField(pmax=pmax, leaf_size=4))
    return direct, accel


def test_farfield_eval_matches_direct():
    solute = uniform_cloud(40, seed=5, density=0.004)
    lmax = 3
    direct, accel = make_pair(solute, lmax, pmax=lmax + 4)
    coeffs = RNG.normal(size=(40, direct.nb))
    ref = direct.sums.eval(coeffs)
    got = accel.sums.eval(coeffs)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(got - ref)) < 5e-8 * scale


def test_farfield_truncation_improves_with_pmax():
    solute = uniform_cloud(60, seed=7, density=0.004)
    lmax = 2
    cav = build_cavity(solute, SwitchParams(0.1), lebedev(50))
    direct = OperatorContext(cav, lmax, mode="incore")
    coeffs = RNG.normal(size=(60, direct.nb))
    ref = direct.sums.eval(coeffs)
    errs = []
    for pmax in (2, 4, 6, 8):
        accel = OperatorContext(build_cavity(solute, SwitchParams(0.1),
                                             lebedev(50)),
                                lmax, farfield=FarField(pmax=pmax, leaf_size=4))
        errs.append(np.max(np.abs(accel.sums.eval(coeffs) - ref)))
    assert errs[-1] < errs[0] * 1e-2
    assert np.all(np.diff(errs) < np.abs(errs[:-1]) * 0.9)


def test_farfield_accumulate_is_exact_transpose():
    solute = uniform_cloud(35, seed=9, density=0.004)
    lmax = 3
    _, accel = make_pair(solute, lmax, pmax=lmax + 2)
    coeffs = RNG.normal(size=(35, accel.nb))
    weights = RNG.normal(size=accel.pointsf.shape[0]) * accel.eval_mask
    lhs = np.dot(accel.sums.eval(coeffs), weights)
    rhs = np.vdot(coeffs, accel.sums.accumulate(weights))
    assert abs(lhs - rhs) < 1e-12 * max(abs(lhs), 1.0)


def test_farfield_accumulate_matches_direct():
    solute = uniform_cloud(40, seed=11, density=0.004)
    lmax = 3
    direct, accel = make_pair(solute, lmax, pmax=lmax + 4)
    weights = RNG.normal(size=direct.pointsf.shape[0]) * direct.eval_mask
    ref = direct.sums.accumulate(weights)
    got = accel.sums.accumulate(weights)
    assert np.max(np.abs(got - ref)) < 1e-8 * np.max(np.abs(ref))


def test_farfield_gradients_match_direct():
    solute = uniform_cloud(30, seed=13, density=0.004)
    lmax = 2
    direct, accel = make_pair(solute, lmax, pmax=lmax + 5)
    coeffs = RNG.normal(size=(30, direct.nb))
    ref_phi, ref_g = direct.sums.eval_with_gradient(coeffs)
    got_phi, got_g = accel.sums.eval_with_gradient(coeffs)
    mask = direct.eval_mask
    scale = np.max(np.abs(ref_g[mask]))
    assert np.max(np.abs(got_phi - ref_phi)) < 1e-7 * np.max(np.abs(ref_phi))
    assert np.max(np.abs((got_g - ref_g)[mask])) < 1e-6 * scale

    weights = RNG.normal(size=direct.pointsf.shape[0]) * mask
    ref_a, ref_ga = direct.sums.accumulate_with_gradient(weights)
    got_a, got_ga = accel.sums.accumulate_with_gradient(weights)
    assert np.max(np.abs(got_a - ref_a)) < 1e-7 * np.max(np.abs(ref_a))
    assert np.max(np.abs(got_ga - ref_ga)) < 1e-6 * np.max(np.abs(ref_ga))


def test_full_system_with_fmm_adjoint_identity():
    solute = uniform_cloud(25, seed=15, density=0.004)
    lmax = 2
    _, accel = make_pair(solute, lmax, pmax=lmax + 4)
    for _ in range(3):
        x = StateVector(RNG.normal(size=(25, accel.nb)),
                        RNG.normal(size=(25, accel.nb)))
        y = StateVector(RNG.normal(size=(25, accel.nb)),
                        RNG.normal(size=(25, accel.nb)))
        lhs = apply_system(accel, x).dot(y)
        rhs = x.dot(apply_system_adjoint(accel, y))
        scale = np.sqrt(x.dot(x) * y.dot(y))
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_full_system_fmm_matches_direct():
    solute = uniform_cloud(30, seed=17, density=0.004)
    lmax = 3
    direct, accel = make_pair(solute, lmax, pmax=lmax + 4)
    x = StateVector(RNG.normal(size=(30, direct.nb)),
                    RNG.normal(size=(30, direct.nb)))
    ref = apply_system(direct, x)
    got = apply_system(accel, x)
    scale = ref.norm_inf()
    assert (got - ref).norm_inf() < 1e-8 * scale


def test_farfield_swept_m2l_matches_cached():
    solute = uniform_cloud(40, seed=19, density=0.004)
    lmax = 3
    cav = build_cavity(solute, SwitchParams(0.1), lebedev(50))
    cached = OperatorContext(build_cavity(solute, SwitchParams(0.1),
                                          lebedev(50)), lmax,
                             farfield=FarField(pmax=lmax + 2, leaf_size=4))
    swept = OperatorContext(cav, lmax,
                            farfield=FarField(pmax=lmax + 2, leaf_size=4,
                                              m2l_cache_budget=0))
    assert swept.sums.m2l_ops is None and cached.sums.m2l_ops is not None
    coeffs = RNG.normal(size=(40, cav.solute.n_spheres and cached.nb))
    a = cached.sums.eval(coeffs)
    b = swept.sums.eval(coeffs)
    assert np.max(np.abs(a - b)) < 1e-13 * max(np.max(np.abs(a)), 1e-30)
    w = RNG.normal(size=swept.pointsf.shape[0]) * swept.eval_mask
    lhs = np.dot(swept.sums.eval(coeffs), w)
    rhs = np.vdot(coeffs, swept.sums.accumulate(w))
    assert abs(lhs - rhs) < 1e-12 * max(abs(lhs), 1.0)
