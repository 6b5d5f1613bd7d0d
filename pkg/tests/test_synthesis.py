import json
from math import sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from nodal3d.errors import GridTooLarge, NotPositiveDefinite, ParameterOutOfRange
from nodal3d.spectrum import make_model
from nodal3d.synthesis import (JITTER_MAX, covariance_matrix, ensemble_realization, exact_gaussian_oracle,
                               grid_dims, mix_seed, new_realization, regularized_cholesky, sample_grid)

BF = make_model("bargmann_fock")
MONO = make_model("monochromatic")


def _within(sample, target, k=4.0):
    sample = np.asarray(sample)
    return abs(sample.mean() - target) < k * sample.std(ddof=1) / sqrt(len(sample))


@pytest.fixture(scope="module")
def mono_ensemble():
    xs = np.array([[0, 0, 0], [0.5, 0, 0], [0, 1.0, 0], [1.2, 1.6, 0]], dtype=float)  # |x| = 0, .5, 1, 2
    vals = []
    grads = []
    for i in range(10_000):
        xi, eta, gxi, _ = new_realization(MONO, 1024, mix_seed(99, i)).evaluate(xs)
        vals.append(xi)
        grads.append(gxi[0])
    return np.array(vals), np.array(grads)


@pytest.fixture(scope="module")
def bf_ensemble():
    rng = np.random.default_rng(12)
    y = rng.uniform(-3, 3, size=3)
    out = []
    for i in range(10_000):
        fr = new_realization(BF, 1024, mix_seed(77, i))
        xi, eta, gxi, _ = fr.evaluate(np.stack([np.zeros(3), y]))
        out.append([xi[0], *gxi[0], eta[1]])
    return np.array(out)


def test_mix_seed_is_deterministic_and_spread():
    assert mix_seed(1, 0) == mix_seed(1, 0)
    seeds = [mix_seed(20240101, i) for i in range(10_000)]
    assert len(set(seeds)) == 10_000
    assert all(0 <= s < 2**64 for s in seeds)
    bits = np.array([[(s >> b) & 1 for b in range(64)] for s in seeds[:2000]])
    assert np.all(np.abs(bits.mean(axis=0) - 0.5) < 0.06)


def test_same_seed_bit_identical():
    a = new_realization(BF, 256, 5)
    b = new_realization(BF, 256, 5)
    for name in ("atoms_xi", "phases_xi", "atoms_eta", "phases_eta"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = new_realization(BF, 256, 6)
    assert not np.array_equal(a.atoms_xi, c.atoms_xi)


def test_xi_and_eta_use_distinct_atoms():
    fr = new_realization(BF, 512, 3)
    assert not np.array_equal(fr.atoms_xi, fr.atoms_eta)
    assert not np.array_equal(fr.phases_xi, fr.phases_eta)


def test_realization_is_immutable():
    fr = new_realization(BF, 16, 0)
    with pytest.raises(ValueError):
        fr.atoms_xi[0, 0] = 1.0


def test_invalid_atom_count():
    with pytest.raises(ParameterOutOfRange):
        new_realization(BF, 0, 0)


def test_ensemble_realization_uses_mixed_seed():
    a = ensemble_realization(BF, 64, 11, 3)
    b = new_realization(BF, 64, mix_seed(11, 3))
    assert np.array_equal(a.atoms_xi, b.atoms_xi)


def test_unit_variance(mono_ensemble, bf_ensemble):
    v = mono_ensemble[0][:, 0] ** 2
    assert _within(v, 1.0)
    assert _within(bf_ensemble[:, 0] ** 2, 1.0)


def test_sinc_correlation(mono_ensemble):
    vals, _ = mono_ensemble
    for j, t in ((1, 0.5), (2, 1.0), (3, 2.0)):
        assert _within(vals[:, 0] * vals[:, j], np.sin(t) / t)


def test_monochromatic_derivative_variance(mono_ensemble):
    _, grads = mono_ensemble
    assert _within(grads[:, 0] ** 2, 1 / 3)


def test_joint_covariance_of_value_and_gradient(bf_ensemble):
    y = bf_ensemble[:, :4]
    target = np.diag([1.0, 1.0, 1.0, 1.0])
    for i in range(4):
        for j in range(i, 4):
            assert _within(y[:, i] * y[:, j], target[i, j])


def test_xi_eta_uncorrelated(bf_ensemble):
    assert _within(bf_ensemble[:, 0] * bf_ensemble[:, 4], 0.0)


def test_excess_kurtosis_small():
    xs = np.array([new_realization(MONO, 1024, mix_seed(31, i)).evaluate(np.zeros(3))[0]
                   for i in range(100_000)])
    assert abs(stats.kurtosis(xs)) < 0.05


def test_gradient_matches_finite_differences():
    fr = new_realization(BF, 1024, 8)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-5, 5, size=(100, 3))
    _, _, gxi, geta = fr.evaluate(pts)
    h = 1e-5
    for c in range(3):
        e = np.zeros(3)
        e[c] = h
        xp, ep, _, _ = fr.evaluate(pts + e)
        xm, em, _, _ = fr.evaluate(pts - e)
        scale = np.max(np.abs(gxi))
        assert np.allclose((xp - xm) / (2 * h), gxi[:, c], rtol=1e-6, atol=1e-6 * scale)
        assert np.allclose((ep - em) / (2 * h), geta[:, c], rtol=1e-6, atol=1e-6 * scale)


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_translation_covariance(x, delta):
    fr = new_realization(BF, 128, 4)
    x = np.array(x)
    delta = np.array(delta)
    a = fr.evaluate(x + delta)
    b = fr.shifted(delta).evaluate(x)
    assert a[0] == pytest.approx(b[0], abs=1e-12)
    assert a[1] == pytest.approx(b[1], abs=1e-12)
    assert np.allclose(a[2], b[2], atol=1e-12)


def test_grid_dims():
    assert grid_dims(1, 0.5) == 5
    assert grid_dims(3, 0.1) == 61
    with pytest.raises(ParameterOutOfRange):
        grid_dims(1, 0.3)
    with pytest.raises(ParameterOutOfRange):
        grid_dims(1, -0.1)
    with pytest.raises(GridTooLarge):
        grid_dims(100, 0.1)


def test_grid_shape_and_axes():
    g = sample_grid(new_realization(BF, 64, 1), 1, 0.5)
    assert g.dims == (5, 5, 5)
    assert g.xi.shape == (5, 5, 5)
    assert np.allclose(g.axis(0), [-1, -0.5, 0, 0.5, 1])


def test_grid_matches_pointwise_evaluation():
    fr = new_realization(BF, 1024, 2)
    g = sample_grid(fr, 1, 0.25, with_grad=True)
    xi, eta, gxi, geta = fr.evaluate(g.points())
    assert np.allclose(g.xi.ravel(), xi, rtol=0, atol=1e-12)
    assert np.allclose(g.eta.ravel(), eta, rtol=0, atol=1e-12)
    assert np.allclose(g.grad_xi.reshape(-1, 3), gxi, rtol=0, atol=1e-11)
    assert np.allclose(g.grad_eta.reshape(-1, 3), geta, rtol=0, atol=1e-11)


def test_grid_export(tmp_path):
    g = sample_grid(new_realization(BF, 32, 1), 1, 0.5)
    p = g.export(tmp_path / "g.bin")
    raw = np.fromfile(p, dtype="<f8").reshape(2, 5, 5, 5)
    assert np.array_equal(raw[0], g.xi) and np.array_equal(raw[1], g.eta)
    side = json.loads((tmp_path / "g.bin.json").read_text())
    assert side["dims"] == [5, 5, 5]
    p = g.export(tmp_path / "g.csv", fmt="csv")
    data = np.loadtxt(p, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 3], g.xi.ravel())
    with pytest.raises(ValueError):
        g.export(tmp_path / "g.x", fmt="hdf5")


def test_oracle_coincident_points_perfectly_correlated():
    out = exact_gaussian_oracle(BF, np.zeros((2, 3)), seed=1, size=2000)
    assert np.corrcoef(out.samples.T)[0, 1] > 1 - 1e-6


def test_oracle_covariance_matches_r():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1.5, 1.5, size=(20, 3))
    out = exact_gaussian_oracle(MONO, pts, seed=2, size=100_000)
    c = covariance_matrix(MONO, pts)
    for a, b in rng.choice(20, size=(10, 2)):
        prod = out.samples[:, a] * out.samples[:, b]
        assert _within(prod, c[a, b])


def test_oracle_bargmann_fock_500_points_small_jitter():
    ax = np.linspace(-1, 1, 8)
    g = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)[:500]
    out = exact_gaussian_oracle(BF, g, seed=0)
    assert out.jitter <= 1e-10
    assert out.samples.shape == (1, 500)


def test_regularized_cholesky_failure():
    with pytest.raises(NotPositiveDefinite):
        regularized_cholesky(np.diag([1.0, -10 * JITTER_MAX]))


def test_oracle_point_cap():
    with pytest.raises(ParameterOutOfRange):
        exact_gaussian_oracle(BF, np.zeros((2001, 3)))
