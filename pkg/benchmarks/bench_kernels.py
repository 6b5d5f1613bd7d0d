"""Numba vs numpy timings for the hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both paths are timed in the same process by calling the kernels with an
explicit backend; the numba timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from nodal3d import _kernels
from nodal3d.nodal import extract_nodal_length
from nodal3d.spectrum import make_model
from nodal3d.synthesis import new_realization, sample_grid


def best_of(fn, repeat):
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=float, default=3.0)
    ap.add_argument("--h", type=float, default=0.1)
    args = ap.parse_args(argv)

    fr = new_realization(make_model("bargmann_fock"), 1024, seed=1)
    g = sample_grid(fr, args.n, args.h)
    pts = np.random.default_rng(0).uniform(-3, 3, (20_000, 3))

    rows = []
    for backend in ("numba", "numpy"):
        if backend == "numba" and not _kernels.use_numba():
            rows.append((backend, float("nan"), float("nan")))
            continue
        extract_nodal_length(g, backend=backend)  # warm-up / compile
        fr.evaluate(pts[:10], backend=backend)
        t_nodal = best_of(lambda: extract_nodal_length(g, backend=backend), args.repeat)
        t_atoms = best_of(lambda: fr.evaluate(pts, backend=backend), args.repeat)
        rows.append((backend, t_nodal, t_atoms))

    a = extract_nodal_length(g, backend="numpy").total_length
    cells = int(np.prod(np.array(g.dims) - 1))
    print(f"grid {g.dims}, {cells} cells, M = {fr.M}, {len(pts)} scattered points")
    print(f"{'backend':8s} {'nodal [s]':>10s} {'atoms [s]':>10s}")
    for name, tn, ta in rows:
        print(f"{name:8s} {tn:10.4f} {ta:10.4f}")
    if _kernels.use_numba():
        b = extract_nodal_length(g, backend="numba").total_length
        print(f"speed-up nodal {rows[1][1] / rows[0][1]:.1f}x, atoms {rows[1][2] / rows[0][2]:.1f}x; "
              f"length numba {b:.15g} numpy {a:.15g}")


if __name__ == "__main__":
    main()
