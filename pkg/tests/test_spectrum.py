from math import factorial, pi, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from nodal3d.errors import ParameterOutOfRange
from nodal3d.spectrum import (BLACK_BODY_C, AnisotropicSpectrum, make_model, normalization_mass,
                              powerlaw_in_scaling_regime, sample_wavevector, second_moment)

CATALOG = [
    ("monochromatic", {}),
    ("bargmann_fock", {}),
    ("gamma", {"p": 1, "beta": 1.0}),
    ("gamma", {"p": 2, "beta": 1.0}),
    ("gamma", {"p": 3, "beta": 2.5}),
    ("black_body", {}),
    ("power_law", {"beta": 0.2}),
    ("power_law", {"beta": 0.1}),
]


def _ids(case):
    name, params = case
    return name + "".join(f"-{k}{v}" for k, v in params.items())


@pytest.mark.parametrize("case", CATALOG, ids=_ids)
def test_mass_is_one(case):
    s = make_model(case[0], **case[1])
    assert abs(normalization_mass(s) - 1.0) < 1e-10


def test_closed_form_densities():
    rho = np.array([0.3, 1.0, 2.7])
    bf = make_model("bargmann_fock")
    assert np.allclose(bf.density(rho), (2 * pi) ** -1.5 * rho**2 * np.exp(-rho**2 / 2), rtol=1e-15)
    g = make_model("gamma", p=3, beta=2.0)
    assert np.allclose(g.density(rho), 2.0**4 / (4 * pi * 6) * rho**3 * np.exp(-2 * rho), rtol=1e-15)
    pl = make_model("power_law", beta=0.2)
    assert np.allclose(pl.density(rho), [0.8 / (4 * pi) * 0.3**-0.2, 0.0, 0.0])
    assert BLACK_BODY_C == pytest.approx(15 / (4 * pi**5), rel=1e-15)


def test_bargmann_fock_density_limits():
    bf = make_model("bargmann_fock")
    assert bf.density(0.0) == 0.0
    assert bf.density(60.0) < 1e-300


def test_gaussian_moment_identity_independent_quadrature():
    val, _ = integrate.quad(lambda r: r**2 * np.exp(-r**2 / 2), 0, np.inf, epsabs=0, epsrel=1e-13)
    assert val == pytest.approx(sqrt(pi / 2), rel=1e-12)


def test_monochromatic_is_atom():
    s = make_model("monochromatic", kappa=1.0)
    assert s.is_atomic
    assert normalization_mass(s) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(TypeError):
        s.density(1.0)


@pytest.mark.parametrize("name,params,bad", [
    ("power_law", {"beta": 1.5}, "beta"),
    ("power_law", {"beta": 0.0}, "beta"),
    ("gamma", {"p": 0}, "p"),
    ("gamma", {"p": 1.5}, "p"),
    ("gamma", {"beta": -1.0}, "beta"),
    ("monochromatic", {"kappa": 0.0}, "kappa"),
    ("bargmann_fock", {"kappa": 1.0}, "kappa"),
    ("nonsense", {}, "model"),
])
def test_parameter_out_of_range(name, params, bad):
    with pytest.raises(ParameterOutOfRange) as exc:
        make_model(name, **params)
    assert exc.value.name == bad
    assert bad in str(exc.value)


def test_scaling_regime_flag():
    assert powerlaw_in_scaling_regime(make_model("power_law", beta=0.2))
    assert not powerlaw_in_scaling_regime(make_model("power_law", beta=0.5))


def test_second_moments():
    assert second_moment(make_model("monochromatic")).lam == pytest.approx(1 / 3, rel=1e-15)
    assert second_moment(make_model("bargmann_fock")).lam == pytest.approx(1.0, rel=1e-14)
    b = 0.2
    assert second_moment(make_model("power_law", beta=b)).lam == pytest.approx((1 - b) / (3 * (3 - b)), rel=1e-10)
    assert second_moment(make_model("power_law", beta=b)).lam == pytest.approx(0.095238, abs=1e-6)
    # GammaType: E|k|^2 = (p+1)(p+2)/beta^2
    g = make_model("gamma", p=2, beta=1.5)
    assert second_moment(g).lam == pytest.approx(12 / 1.5**2 / 3, rel=1e-14)


@pytest.mark.parametrize("case", CATALOG[1:], ids=_ids)
def test_second_moment_matches_direct_quadrature(case):
    s = make_model(case[0], **case[1])
    lo, hi = s.support
    val, _ = integrate.quad(lambda r: r**2 * s.density(r), lo, min(hi, 200.0), limit=400, epsrel=1e-12)
    assert second_moment(s).lam == pytest.approx(4 * pi / 3 * val, rel=1e-9)


@given(st.floats(0.05, 20.0))
def test_monochromatic_moment_exact(kappa):
    m = second_moment(make_model("monochromatic", kappa=kappa))
    assert m.lam == kappa**2 / 3
    assert np.array_equal(m.matrix, m.lam * np.eye(3))


@given(st.floats(0.2, 5.0))
def test_scalar_transform_rescales_moment(c):
    base = make_model("bargmann_fock")
    m = second_moment(AnisotropicSpectrum(base, c * np.eye(3)))
    assert np.allclose(m.matrix, c * c * np.eye(3), rtol=1e-14, atol=0)
    assert m.eigenvalues == pytest.approx((c * c,) * 3, rel=1e-14)


@given(st.lists(st.floats(-2, 2), min_size=9, max_size=9))
def test_anisotropic_moment_matrix(entries):
    a = np.array(entries).reshape(3, 3)
    if abs(np.linalg.det(a)) < 1e-3:
        return
    base = make_model("gamma", p=2, beta=1.0)
    m = second_moment(AnisotropicSpectrum(base, a))
    lam = second_moment(base).lam
    assert np.allclose(m.matrix, lam * a @ a.T, rtol=1e-12, atol=1e-12)
    assert list(m.eigenvalues) == sorted(m.eigenvalues)
    assert np.allclose(m.eigenvalues, np.linalg.eigvalsh(lam * a @ a.T), rtol=1e-10, atol=1e-12)


def test_singular_transform_rejected():
    with pytest.raises(ParameterOutOfRange):
        AnisotropicSpectrum(make_model("bargmann_fock"), np.diag([1.0, 1.0, 0.0]))


def test_monochromatic_wavevectors_on_sphere():
    rng = np.random.default_rng(1)
    k = sample_wavevector(make_model("monochromatic"), rng, 1000)
    assert np.allclose(np.linalg.norm(k, axis=1), 1.0, rtol=1e-15)
    assert sample_wavevector(make_model("monochromatic"), rng).shape == (3,)


@pytest.mark.parametrize("case", CATALOG, ids=_ids)
def test_wavevector_mean_zero(case):
    s = make_model(case[0], **case[1])
    k = sample_wavevector(s, np.random.default_rng(7), 100_000)
    se = k.std(axis=0, ddof=1) / sqrt(len(k))
    assert np.all(np.abs(k.mean(axis=0)) < 4 * se)


def test_bargmann_fock_mean_square_modulus():
    k = sample_wavevector(make_model("bargmann_fock"), np.random.default_rng(3), 100_000)
    q = (k**2).sum(axis=1)
    assert abs(q.mean() - 3.0) < 4 * q.std(ddof=1) / sqrt(len(q))


def _cdf(s):
    if s.model == "power_law":
        return lambda r: np.clip(r, 0, 1) ** (1 - s.beta)
    if s.model == "bargmann_fock":
        return stats.chi(3).cdf
    if s.model == "gamma":
        return stats.gamma(s.p + 1, scale=1 / s.beta).cdf

    def bb(r):
        r = np.atleast_1d(r)
        return np.array([integrate.quad(lambda x: 4 * pi * s.density(x), 0, v)[0] for v in r])
    return bb


@pytest.mark.parametrize("case", CATALOG[1:], ids=_ids)
def test_radial_samples_pass_ks(case):
    s = make_model(case[0], **case[1])
    rho = np.linalg.norm(sample_wavevector(s, np.random.default_rng(11), 100_000), axis=1)
    if s.model == "black_body":
        # tabulate the exact CDF once and interpolate
        grid = np.linspace(0, 60, 6001)
        vals = np.concatenate([[0], np.cumsum([integrate.quad(lambda x: 4 * pi * s.density(x), a, b)[0]
                                                for a, b in zip(grid[:-1], grid[1:])])])
        cdf = lambda r: np.interp(r, grid, vals)
    else:
        cdf = _cdf(s)
    assert stats.kstest(rho, cdf).pvalue > 0.01


def test_gamma_moment_formula():
    s = make_model("gamma", p=3, beta=2.0)
    assert s.radial_moment(2) == pytest.approx(factorial(5) / factorial(3) / 4.0, rel=1e-14)
