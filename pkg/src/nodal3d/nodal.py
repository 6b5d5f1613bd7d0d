"""Length of the nodal set {xi = eta = 0} from gridded samples.

Each grid cube is split into six Kuhn tetrahedra sharing the main diagonal.
On a tetrahedron the linear interpolants of xi and eta vanish together on a
straight segment, found exactly from the faces it pierces.
"""

import csv
from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from . import _kernels
from .errors import ParameterOutOfRange
from .synthesis import analytic_grid

ZERO_FLOOR = 1e-300


@dataclass(frozen=True)
class NodalResult:
    total_length: float
    segments: np.ndarray
    cells_visited: int
    cells_with_intersection: int
    degenerate_cells: int
    cell_lengths: np.ndarray = None

    def segment_lengths(self):
        if self.segments is None:
            return np.zeros(0)
        return np.linalg.norm(self.segments[:, 3:] - self.segments[:, :3], axis=1)

    def dump_segments(self, path):
        """CSV with columns x1,y1,z1,x2,y2,z2."""
        if self.segments is None:
            raise ValueError("segments were not recorded; pass keep_segments=True")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x1", "y1", "z1", "x2", "y2", "z2"])
            for row in self.segments:
                w.writerow([repr(float(v)) for v in row])
        return path


def _floor_zeros(a):
    a = np.array(a, dtype=float, copy=True)
    a[np.abs(a) < ZERO_FLOOR] = ZERO_FLOOR
    return a


def extract_nodal_length(g, keep_segments=False, order=None, backend=None):
    """Polyline length of the common zero set of ``g.xi`` and ``g.eta``.

    Parameters
    ----------
    g : GridSample
    keep_segments : bool
        Also return the (S, 6) array of segment endpoints.
    order : array of int, optional
        Cell traversal order (numba backend). The result does not depend on it.
    backend : {"auto", "numba", "numpy"}
    """
    if min(g.dims) < 2:
        raise ParameterOutOfRange("dims", g.dims, "at least 2 vertices per axis")
    u = _floor_zeros(g.xi)
    v = _floor_zeros(g.eta)
    lengths, nseg, degenerate, segs = _kernels.nodal_cells(
        u, v, g.origin, g.h, order=order, want_segments=keep_segments, backend=backend)
    total = _kernels.tree_sum(lengths)
    return NodalResult(
        total_length=total,
        segments=segs,
        cells_visited=int(lengths.size),
        cells_with_intersection=int(np.count_nonzero(nseg)),
        degenerate_cells=int(degenerate),
        cell_lengths=lengths,
    )


# ---------------------------------------------------------------------------
# analytic test fields


@dataclass(frozen=True)
class TestField:
    name: str
    fn: object
    n: float
    exact_length: float

    __test__ = False  # keep pytest from collecting this as a test class


def axis_field():
    return TestField("axis", lambda x, y, z: x + 1j * y, 1.0, 2.0)


def circle_field(radius=0.5):
    return TestField("circle", lambda x, y, z: (x * x + y * y - radius * radius) + 1j * z, 1.0,
                     2 * pi * radius)


def helix_field():
    return TestField("helix", lambda x, y, z: (x - np.cos(z)) + 1j * (y - np.sin(z)), 2.0, 4 * sqrt(2.0))


TEST_FIELDS = {"axis": axis_field, "circle": circle_field, "helix": helix_field}


@dataclass(frozen=True)
class ConvergenceTable:
    field: str
    h: np.ndarray
    length: np.ndarray
    error: np.ndarray
    order: float


def length_convergence_study(field, hs, backend=None):
    """Measured length and absolute error at each spacing, with a fitted order.

    The order is the least-squares slope of log(error) on log(h) over the
    nonzero errors (NaN when fewer than two are nonzero).
    """
    if isinstance(field, str):
        field = TEST_FIELDS[field]()
    hs = np.asarray(hs, dtype=float)
    lengths = np.array([extract_nodal_length(analytic_grid(field.fn, field.n, h), backend=backend).total_length
                        for h in hs])
    err = np.abs(lengths - field.exact_length)
    nz = err > 1e-13 * field.exact_length
    order = float("nan")
    if np.count_nonzero(nz) >= 2:
        order = float(np.polyfit(np.log(hs[nz]), np.log(err[nz]), 1)[0])
    return ConvergenceTable(field.name, hs, lengths, err, order)
