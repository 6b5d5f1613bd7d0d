from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from nodal3d.errors import ParameterOutOfRange
from nodal3d.kacrice import (CROSS_NORM_MEAN, cross_product_moment, cross_product_moment_exact,
                             expected_length_anisotropic, expected_length_anisotropic_exact,
                             expected_length_isotropic, first_order_expansion, normal_pairs,
                             perturbation_check, printed_expansion, sphere_mean_norm)

# E|diag(1,1,1/2)(N ^ N')| = 2 int_0^1 sqrt(1 - 3 z^2 / 4) dz = 1/2 + 2 pi / (3 sqrt 3)
D114 = 1.7091995761561452


def test_isotropic_examples():
    assert expected_length_isotropic(1 / 3, 8) == pytest.approx(8 / (3 * pi), rel=1e-15)
    assert expected_length_isotropic(1 / 3, 8) == pytest.approx(0.84883, abs=1e-5)
    assert expected_length_isotropic(1.0, 8) == pytest.approx(2.54648, abs=1e-5)
    assert expected_length_isotropic(1.0, 0) == 0.0
    with pytest.raises(ParameterOutOfRange):
        expected_length_isotropic(0.0, 1.0)
    with pytest.raises(ParameterOutOfRange):
        expected_length_isotropic(1.0, -1.0)


def test_identity_moment_is_two():
    est = cross_product_moment((1, 1, 1), samples=1_000_000, seed=1)
    assert abs(est.value - 2.0) < 4 * est.std_error
    assert est.std_error < 2e-3


def test_square_norm_moment_is_six():
    acc = []
    for n1, n2 in normal_pairs(1_000_000, 5):
        acc.append((np.cross(n1, n2) ** 2).sum(axis=1))
    y = np.concatenate(acc)
    assert abs(y.mean() - 6.0) < 4 * y.std(ddof=1) / sqrt(len(y))


@given(st.floats(0.1, 10.0), st.lists(st.floats(0.2, 5.0), min_size=3, max_size=3))
def test_scaling_identity_common_random_numbers(c, d):
    a = cross_product_moment(d, samples=4096, seed=3).value
    b = cross_product_moment(np.array(d) * c, samples=4096, seed=3).value
    assert b == pytest.approx(a / sqrt(c), rel=1e-12)


def test_anisotropic_oracle_value():
    ref = 2 * integrate.quad(lambda z: np.sqrt(1 - 0.75 * z * z), 0, 1, epsabs=1e-15, epsrel=1e-13)[0]
    assert ref == pytest.approx(D114, rel=1e-14)
    assert D114 == pytest.approx(0.5 + 2 * pi / (3 * sqrt(3)), rel=1e-15)
    assert cross_product_moment_exact((1, 1, 4)) == pytest.approx(D114, rel=1e-13)
    est = cross_product_moment((1, 1, 4), samples=1_000_000, seed=2)
    assert abs(est.value - D114) < 4 * est.std_error


def test_control_variate_keeps_mean_and_cuts_noise():
    plain = cross_product_moment((1, 1, 4), samples=400_000, seed=6)
    cv = cross_product_moment((1, 1, 4), samples=400_000, seed=6, control_variate=True)
    assert abs(cv.value - D114) < 4 * cv.std_error
    assert cv.std_error < plain.std_error


@given(st.lists(st.floats(0.1, 10.0), min_size=3, max_size=3))
def test_sphere_quadrature_against_adaptive(d):
    d = np.array(d)
    f = lambda phi, z: np.sqrt((1 - z * z) * (np.cos(phi) ** 2 / d[0] + np.sin(phi) ** 2 / d[1]) + z * z / d[2])
    ref = integrate.dblquad(f, -1, 1, 0, 2 * pi, epsabs=1e-12, epsrel=1e-11)[0] / (4 * pi)
    assert sphere_mean_norm(d) == pytest.approx(ref, rel=1e-9)


def test_exact_isotropic_collapse():
    for lam in (1 / 3, 1.0, 2.5):
        assert expected_length_anisotropic_exact((lam,) * 3, 8.0) == pytest.approx(lam * 8 / pi, rel=1e-13)
    assert cross_product_moment_exact((1, 1, 1)) == pytest.approx(CROSS_NORM_MEAN, rel=1e-14)


def test_anisotropic_length_examples():
    iso = expected_length_anisotropic((0.5, 0.5, 0.5), 8.0, samples=200_000, seed=1, control_variate=False)
    assert abs(iso.value - 0.5 * 8 / pi) < 4 * iso.std_error
    est = expected_length_anisotropic((1, 1, 4), 8.0, samples=1_000_000, seed=4)
    target = sqrt(4.0) / (2 * pi) * D114 * 8
    assert abs(est.value - target) < 4 * est.std_error
    double = expected_length_anisotropic((1, 1, 4), 16.0, samples=1_000_000, seed=4)
    assert double.value == 2 * est.value


def test_invalid_eigenvalues():
    with pytest.raises(ParameterOutOfRange):
        cross_product_moment((1, 1, 0), samples=10)
    with pytest.raises(ParameterOutOfRange):
        cross_product_moment((1, 1), samples=10)


def test_perturbation_zero():
    r = perturbation_check((1.0, 1.0, 1.0), vol=2.0, samples=100_000, fd_samples=100_000)
    assert r.paper_value == r.isotropic_value == pytest.approx(2 / pi)
    assert r.quadrature_value == pytest.approx(2 / pi, rel=1e-13)
    assert abs(r.oracle_value - 2 / pi) < 4 * r.oracle_std_error + 1e-12


def test_perturbation_traceless():
    r = perturbation_check((1.02, 1.0, 0.98), lam=1.0, samples=1_000_000, fd_samples=100_000)
    assert abs(r.quadrature_value / r.isotropic_value - 1) < 4e-4
    assert abs(r.oracle_relative_deviation) < 4e-4 + 4 * r.oracle_std_error / r.isotropic_value


def test_perturbation_report_fields():
    r = perturbation_check((1.05, 1.0, 1.0), lam=1.0, samples=200_000, fd_samples=1_000_000)
    d = r.as_dict()
    for key in ("paper_value", "oracle_value", "discrepancy", "fd_partials", "quadrature_value"):
        assert key in d
    assert np.isfinite(r.discrepancy)
    # every partial of E|xi' ^ eta'| is 2/3 at the isotropic point
    assert np.all(np.abs(r.fd_partials - 2 / 3) < 4 * r.fd_partials_std_error + 1e-3)
    assert r.printed_partial == pytest.approx(-1 / 3)


def test_first_order_expansion_tracks_exact_value():
    lam = 1.0
    for eigs in [(1.05, 1, 1), (1, 0.97, 1.01), (1.02, 1.02, 1.02)]:
        exact = expected_length_anisotropic_exact(eigs, 1.0)
        approx = first_order_expansion(eigs, lam, 1.0)
        assert abs(approx - exact) < 3 * max(abs(e - lam) for e in eigs) ** 2
    # the printed coefficient misses the exact first-order change
    e = (1.05, 1, 1)
    exact = expected_length_anisotropic_exact(e, 1.0)
    assert abs(printed_expansion(e, lam, 1.0) - exact) > 10 * abs(first_order_expansion(e, lam, 1.0) - exact)


def test_perturbation_guard():
    with pytest.raises(ParameterOutOfRange):
        perturbation_check((2.0, 1.0, 1.0), lam=1.0, samples=10, fd_samples=10)
