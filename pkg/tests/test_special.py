"""Special functions: harmonics, Bessel functions, quadrature grids."""

import numpy as np
import pytest
from scipy.special import spherical_in, spherical_kn

from ddlpb.bessel import (bessel_i, bessel_i_scaled, bessel_k,
                          bessel_k_scaled, bessel_table)
from ddlpb.errors import ConfigurationError, DomainError
from ddlpb.harmonics import (HarmonicBasis, basis_index, eval_harmonic_gradients,
                             eval_harmonics)
from ddlpb.lebgrid import SUPPORTED_SIZES, lebedev

RNG = np.random.default_rng(1234)


def random_units(n, rng=RNG):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Lebedev grids
# ---------------------------------------------------------------------------

def test_lebedev_supported_sizes():
    assert SUPPORTED_SIZES == (6, 14, 26, 38, 50, 74, 86, 110, 146, 170,
                               194, 230, 266, 302, 350, 434, 590, 770)


@pytest.mark.parametrize("n", SUPPORTED_SIZES)
def test_lebedev_weights_and_unit_directions(n):
    g = lebedev(n)
    assert g.n_points == n
    assert g.directions.shape == (n, 3)
    assert abs(g.weights.sum() - 4.0 * np.pi) < 1e-12
    assert np.all(np.abs(np.linalg.norm(g.directions, axis=1) - 1.0) < 1e-14)


def test_lebedev_unsupported_size_lists_options():
    with pytest.raises(ConfigurationError) as exc:
        lebedev(100)
    assert "110" in str(exc.value)


def test_lebedev_6_is_octahedron_with_equal_weights():
    g = lebedev(6)
    assert np.allclose(np.abs(g.directions).sum(axis=1), 1.0)
    assert np.allclose(g.weights, g.weights[0])


@pytest.mark.parametrize("n", SUPPORTED_SIZES)
def test_lebedev_integrates_constant_harmonic(n):
    g = lebedev(n)
    basis = HarmonicBasis(0)
    y00 = eval_harmonics(basis, g.directions)[:, 0]
    assert abs(np.dot(g.weights, y00 ** 2) - 1.0) < 1e-12


@pytest.mark.parametrize("n,order", [(110, 17), (302, 29), (590, 41)])
def test_lebedev_orthonormality_to_algebraic_order(n, order):
    g = lebedev(n)
    lmax = order // 2
    Y = eval_harmonics(HarmonicBasis(lmax), g.directions)
    gram = (Y * g.weights[:, None]).T @ Y
    assert np.max(np.abs(gram - np.eye(Y.shape[1]))) < 1e-10


# ---------------------------------------------------------------------------
# Spherical harmonics
# ---------------------------------------------------------------------------

def test_constant_harmonic_value():
    basis = HarmonicBasis(0)
    for u in random_units(10):
        assert abs(eval_harmonics(basis, u)[0] - 1.0 / (2 * np.sqrt(np.pi))) < 1e-15


def test_axis_symmetry_at_north_pole():
    basis = HarmonicBasis(2)
    y = eval_harmonics(basis, np.array([0.0, 0.0, 1.0]))
    assert abs(y[basis_index(1, 0)] - np.sqrt(3 / (4 * np.pi))) < 1e-14
    assert abs(y[basis_index(1, 1)]) < 1e-14
    assert abs(y[basis_index(1, -1)]) < 1e-14


def test_harmonics_match_scipy_complex_combination():
    # cross-check the real basis against scipy's complex harmonics
    sph_harm = pytest.importorskip("scipy.special").sph_harm_y
    basis = HarmonicBasis(8)
    pts = random_units(20)
    theta = np.arccos(pts[:, 2])
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    ours = eval_harmonics(basis, pts)
    for l in range(9):
        for m in range(0, l + 1):
            z = sph_harm_all = sph_harm(l, m, theta, phi)
            if m == 0:
                ref = z.real
                assert np.max(np.abs(ours[:, basis_index(l, 0)] - ref)) < 1e-12
            else:
                refc = np.sqrt(2.0) * (-1.0) ** m * z.real
                refs = np.sqrt(2.0) * (-1.0) ** m * z.imag
                assert np.max(np.abs(ours[:, basis_index(l, m)] - refc)) < 1e-12
                assert np.max(np.abs(ours[:, basis_index(l, -m)] - refs)) < 1e-12


def test_non_unit_input_rejected():
    basis = HarmonicBasis(3)
    with pytest.raises(DomainError):
        eval_harmonics(basis, np.array([0.0, 0.0, 1.01]))
    with pytest.raises(DomainError):
        eval_harmonic_gradients(basis, np.array([1.0, 1.0, 1.0]))


def test_gradient_of_constant_harmonic_vanishes():
    basis = HarmonicBasis(0)
    _, g = eval_harmonic_gradients(basis, random_units(5))
    assert np.max(np.abs(g)) == 0.0


def test_gradient_tangency():
    basis = HarmonicBasis(10)
    pts = random_units(1000)
    _, g = eval_harmonic_gradients(basis, pts)
    dots = np.einsum("pbk,pk->pb", g, pts)
    assert np.max(np.abs(dots)) < 1e-12


def test_gradients_match_tangent_finite_differences():
    basis = HarmonicBasis(6)
    pts = random_units(30)
    vals, grads = eval_harmonic_gradients(basis, pts)
    h = 1e-5
    for p, u in enumerate(pts):
        # two tangent directions
        a = np.array([1.0, 0.3, -0.2])
        t1 = a - np.dot(a, u) * u
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(u, t1)
        for t in (t1, t2):
            up = u + h * t
            um = u - h * t
            yp = eval_harmonics(basis, up / np.linalg.norm(up))
            ym = eval_harmonics(basis, um / np.linalg.norm(um))
            fd = (yp - ym) / (2 * h)
            an = grads[p] @ t
            assert np.max(np.abs(fd - an)) < 5e-9


def test_gradients_at_poles_are_finite_and_correct():
    basis = HarmonicBasis(5)
    for sign in (1.0, -1.0):
        u = np.array([0.0, 0.0, sign])
        _, g = eval_harmonic_gradients(basis, u)
        assert np.all(np.isfinite(g))
        # FD along x for Y_11 (proportional to x): d/dx near pole
        h = 1e-6
        up = np.array([h, 0.0, sign * np.sqrt(1 - h * h)])
        y0 = eval_harmonics(basis, u)
        yp = eval_harmonics(basis, up)
        fd = (yp - y0) / h
        an = g[:, 0]
        assert np.max(np.abs(fd - an)) < 1e-5


# ---------------------------------------------------------------------------
# Modified spherical Bessel functions
# ---------------------------------------------------------------------------

def test_bessel_i_closed_forms():
    iv, idv = bessel_i(1, 1.0)
    assert abs(iv[0] - np.sinh(1.0)) < 1e-14
    assert abs(iv[1] - (np.cosh(1.0) - np.sinh(1.0))) < 1e-14
    assert abs(idv[0] - iv[1]) < 1e-14


def test_bessel_i_small_argument_limit():
    # i_l(x)/x^l -> 1/(2l+1)!! as x -> 0
    x = 1e-6
    iv, _ = bessel_i(6, x)
    dfact = 1.0
    for l in range(7):
        if l > 0:
            dfact *= 2 * l + 1
        assert abs(iv[l] / x ** l * dfact - 1.0) < 1e-6


def test_bessel_k_ratio_closed_form():
    kv1, _ = bessel_k(0, 1.0)
    kv2, _ = bessel_k(0, 2.0)
    assert abs(kv2[0] / kv1[0] - np.exp(-1.0) / 2.0) < 1e-14


def test_bessel_k_prefactor_convention():
    kv, _ = bessel_k(2, 1.5)
    assert abs(kv[0] - np.exp(-1.5) / 1.5) < 1e-15


def test_bessel_against_scipy():
    ls = np.arange(0, 13)
    for x in (0.002, 0.31, 1.0, 4.7, 21.0, 80.0):
        iv, idv = bessel_i(12, x)
        assert np.max(np.abs(iv / spherical_in(ls, x) - 1.0)) < 1e-12
        assert np.max(np.abs(idv / spherical_in(ls, x, derivative=True) - 1.0)) < 1e-11
        kv, kdv = bessel_k(12, x)
        scale = 2.0 / np.pi  # scipy uses the pi/2 prefactor convention
        assert np.max(np.abs(kv / (scale * spherical_kn(ls, x)) - 1.0)) < 1e-12
        assert np.max(np.abs(kdv / (scale * spherical_kn(ls, x, derivative=True)) - 1.0)) < 1e-11


def test_bessel_scaled_huge_argument():
    vals, derivs = bessel_i_scaled(8, 900.0)
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)
    kvals, kderivs = bessel_k_scaled(8, 900.0)
    assert np.all(np.isfinite(kvals)) and np.all(kvals > 0)
    # ihat_l -> 1/(2x) for large x
    assert abs(vals[0] * 1800.0 - 1.0) < 1e-10


def test_bessel_recurrence_consistency():
    for x in (1e-3, 0.5, 1.0, 5.0, 50.0):
        iv, _ = bessel_i(16, x)
        kv, _ = bessel_k(16, x)
        for l in range(1, 16):
            lhs = iv[l - 1] - iv[l + 1]
            assert abs(lhs - (2 * l + 1) / x * iv[l]) <= 1e-10 * max(abs(lhs), 1e-300)
            lhs_k = kv[l + 1] - kv[l - 1]
            assert abs(lhs_k - (2 * l + 1) / x * kv[l]) <= 1e-10 * abs(lhs_k)


def test_bessel_wronskian_identity():
    # i_l(x) k_l'(x) - i_l'(x) k_l(x) = -1/x^2 under the e^-x/x convention
    for x in (0.5, 1.0, 5.0):
        t = bessel_table(8, x)
        w = t.i_values * t.k_derivs - t.i_derivs * t.k_values
        assert np.max(np.abs(w + 1.0 / x ** 2)) < 1e-10 / x ** 2


def test_bessel_monotonicity():
    xs = np.linspace(0.1, 10.0, 40)
    iv = np.array([bessel_i(6, x)[0] for x in xs])
    kv = np.array([bessel_k(6, x)[0] for x in xs])
    assert np.all(np.diff(iv, axis=0) > 0)
    assert np.all(np.diff(kv, axis=0) < 0)
    kd = np.array([bessel_k(6, x)[1] for x in xs])
    assert np.all(kd < 0)


def test_bessel_domain_errors():
    with pytest.raises(DomainError):
        bessel_i(4, 0.0)
    with pytest.raises(DomainError):
        bessel_k(4, -1.0)


def test_bessel_deterministic():
    a1 = bessel_i_scaled(10, 3.7)
    a2 = bessel_i_scaled(10, 3.7)
    assert np.array_equal(a1[0], a2[0]) and np.array_equal(a1[1], a2[1])
