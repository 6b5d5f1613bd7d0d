import time

import numpy as np

from nodal3d.spectrum import make_model
from nodal3d.synthesis import new_realization, sample_grid


def _best_time(fr, n, h, repeats=3):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        sample_grid(fr, n, h)
        best = min(best, time.perf_counter() - t0)
    return best


def test_sample_grid_scales_linearly_in_vertices():
    fr = new_realization(make_model("bargmann_fock"), 1024, 0)
    sample_grid(fr, 1.0, 0.1)  # warm caches and BLAS threads
    # from d = 61 vertices per axis the O(d^3 M) GEMM dominates; smaller grids
    # carry a visible O(d^2 M) setup term and are excluded
    ns = [3.0, 4.0, 5.0, 6.0, 8.0]
    verts = np.array([(2 * n / 0.1 + 1) ** 3 for n in ns])
    times = np.array([_best_time(fr, n, 0.1) for n in ns])
    slope, icpt = np.polyfit(verts, times, 1)
    fit = slope * verts + icpt
    ratio = times / fit
    assert slope > 0
    assert np.all(ratio < 1.3) and np.all(ratio > 1 / 1.3), (times, fit)
