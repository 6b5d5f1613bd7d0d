from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nodal3d._accel import HAS_NUMBA
from nodal3d.errors import ParameterOutOfRange
from nodal3d.nodal import (TEST_FIELDS, circle_field, extract_nodal_length, helix_field,
                           length_convergence_study)
from nodal3d.spectrum import make_model
from nodal3d.synthesis import GridSample, analytic_grid, new_realization, sample_grid

BACKENDS = ["numpy"] + (["numba"] if HAS_NUMBA else [])


def _random_grid(seed=0, n=1.5, h=0.1):
    return sample_grid(new_realization(make_model("bargmann_fock"), 512, seed), n, h)


@pytest.mark.parametrize("backend", BACKENDS)
def test_axis_field_exact(backend):
    g = analytic_grid(lambda x, y, z: x + 1j * y, 1.0, 0.25)
    res = extract_nodal_length(g, keep_segments=True, backend=backend)
    assert res.total_length == 2.0
    assert np.allclose(res.segments[:, [0, 1, 3, 4]], 0.0, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_positive_field_has_no_nodal_set(backend):
    g = analytic_grid(lambda x, y, z: (2 + x * x) + 1j * y, 1.0, 0.25)
    res = extract_nodal_length(g, keep_segments=True, backend=backend)
    assert res.total_length == 0.0
    assert res.segments.shape == (0, 6)
    assert res.cells_with_intersection == 0


def test_circle_at_fine_spacing():
    g = analytic_grid(circle_field().fn, 1.0, 0.02)
    assert abs(extract_nodal_length(g).total_length / pi - 1) < 0.01


def test_circle_errors_strictly_decrease():
    t = length_convergence_study("circle", [0.1, 0.05, 0.025])
    assert np.all(np.diff(t.error) < 0)
    assert 1.5 < t.order < 2.5


def test_circle_monotone_refinement():
    hs = [0.2, 0.1, 0.05, 0.025, 0.0125]
    err = length_convergence_study(circle_field(), hs).error
    inversions = [b - a for a, b in zip(err, err[1:]) if b > a]
    assert len(inversions) <= 1 and all(d < 1e-6 for d in inversions)


def test_axis_study_has_zero_error():
    t = length_convergence_study("axis", [0.5, 0.25, 0.1])
    assert np.all(t.error == 0.0)
    assert np.isnan(t.order)


def test_helix_converges_to_arc_length():
    f = helix_field()
    assert f.exact_length == pytest.approx(4 * sqrt(2))
    t = length_convergence_study(f, [0.1, 0.05, 0.025])
    assert t.error[-1] / f.exact_length < 1e-4
    assert np.all(np.diff(t.error) < 0)


def test_registry():
    assert set(TEST_FIELDS) == {"axis", "circle", "helix"}


def test_total_is_sum_of_segments():
    res = extract_nodal_length(_random_grid(1), keep_segments=True)
    seg = res.segment_lengths()
    assert res.total_length == pytest.approx(np.sum(seg), rel=1e-13)
    assert res.total_length == pytest.approx(np.sum(res.cell_lengths), rel=1e-13)


def test_segments_inside_box_and_one_per_tet():
    g = _random_grid(2)
    res = extract_nodal_length(g, keep_segments=True)
    s = res.segments
    assert np.all(np.abs(s) <= g.n + 1e-12)
    mid = 0.5 * (s[:, :3] + s[:, 3:])
    cell = np.floor((mid + g.n) / g.h).astype(int)
    cell = np.clip(cell, 0, g.dims[0] - 2)
    _, counts = np.unique(cell, axis=0, return_counts=True)
    # six tetrahedra per cube, at most one segment each
    assert counts.max() <= 6
    assert res.cells_with_intersection <= len(s) <= 6 * res.cells_with_intersection


def test_linear_field_segment_endpoints_on_zero_set():
    a = np.array([0.3, -0.7, 0.2])
    b = np.array([0.5, 0.1, -0.9])
    g = analytic_grid(lambda x, y, z: (a[0] * x + a[1] * y + a[2] * z + 0.05)
                      + 1j * (b[0] * x + b[1] * y + b[2] * z - 0.11), 1.0, 0.2)
    res = extract_nodal_length(g, keep_segments=True)
    for ends in (res.segments[:, :3], res.segments[:, 3:]):
        assert np.allclose(ends @ a + 0.05, 0.0, atol=1e-12)
        assert np.allclose(ends @ b - 0.11, 0.0, atol=1e-12)


@pytest.mark.skipif(not HAS_NUMBA, reason="cell order is a numba-backend option")
@given(st.integers(0, 2**32 - 1))
def test_traversal_order_independence(seed):
    g = _random_grid(3, n=1.0, h=0.1)
    ref = extract_nodal_length(g, backend="numba").total_length
    cells = (g.dims[0] - 1) ** 3
    order = np.random.default_rng(seed).permutation(cells)
    assert extract_nodal_length(g, order=order, backend="numba").total_length == ref


def test_backends_agree():
    if not HAS_NUMBA:
        pytest.skip("numba not installed")
    g = _random_grid(4)
    a = extract_nodal_length(g, keep_segments=True, backend="numba")
    b = extract_nodal_length(g, keep_segments=True, backend="numpy")
    assert a.total_length == pytest.approx(b.total_length, rel=1e-14)
    assert np.allclose(a.cell_lengths, b.cell_lengths, rtol=1e-13, atol=1e-15)
    assert a.cells_with_intersection == b.cells_with_intersection


def test_zero_vertices_are_floored():
    # zeros on vertices of both components along the x3 axis
    g = analytic_grid(lambda x, y, z: x * y + 1j * (x - y), 1.0, 0.25)
    res = extract_nodal_length(g)
    assert np.isfinite(res.total_length)
    again = extract_nodal_length(g)
    assert again.total_length == res.total_length


def test_rigid_motion_periodic_field():
    fn = lambda x, y, z: (np.cos(x) + np.cos(y) + np.cos(z)) + 1j * np.sin(x + 2 * y - z)
    n = pi
    h = 2 * pi / 126
    ref = extract_nodal_length(analytic_grid(fn, n, h)).total_length
    d = (0.37, -0.81, 0.23)
    moved = extract_nodal_length(analytic_grid(lambda x, y, z: fn(x + d[0], y + d[1], z + d[2]), n, h)).total_length
    assert abs(moved / ref - 1) < 0.02


def test_dump_segments(tmp_path):
    res = extract_nodal_length(analytic_grid(lambda x, y, z: x + 1j * y, 1.0, 0.5), keep_segments=True)
    p = res.dump_segments(tmp_path / "s.csv")
    lines = p.read_text().splitlines()
    assert lines[0] == "x1,y1,z1,x2,y2,z2"
    assert len(lines) == 1 + len(res.segments)
    with pytest.raises(ValueError):
        extract_nodal_length(analytic_grid(lambda x, y, z: x + 1j * y, 1.0, 0.5)).dump_segments(tmp_path / "t.csv")


def test_rejects_degenerate_grid():
    g = GridSample(1.0, 2.0, (1, 1, 1), np.ones((1, 1, 1)), np.ones((1, 1, 1)))
    with pytest.raises(ParameterOutOfRange):
        extract_nodal_length(g)
