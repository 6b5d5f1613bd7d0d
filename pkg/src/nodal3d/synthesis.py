"""Random-wave synthesis by sums of random cosines.

A realization stores M wavevectors and phases per component and evaluates

    xi(x) = sqrt(2/M) * sum_j cos(<k_j, x> + theta_j),

with an independent atom set for eta. For i.i.d. atoms drawn from the
probability law Pi(dk)/|k|^2 and uniform phases, E[xi(x) xi(y)] = r(x - y)
for every M, and marginals become Gaussian as M grows.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg

from . import _kernels
from .covariance import anisotropic_covariance
from .errors import GridTooLarge, NotPositiveDefinite, ParameterOutOfRange
from .spectrum import sample_wavevector

DEFAULT_M = 1024
MAX_VERTICES_PER_AXIS = 1025
MAX_VERTICES = 40_000_000
JITTER_START = 1e-12
JITTER_MAX = 1e-8
MAX_ORACLE_POINTS = 2000

_MASK64 = (1 << 64) - 1


def mix_seed(master_seed, index):
    """splitmix64 finalizer applied to ``master + (index+1) * golden``.

    Consecutive indices give decorrelated 64-bit seeds; the mapping is a
    bijection of the sum, so distinct (master, index) pairs rarely collide.
    """
    z = (int(master_seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FieldRealization:
    """One draw of the complex wave psi = xi + i*eta (immutable)."""

    spectrum: object
    atoms_xi: np.ndarray
    phases_xi: np.ndarray
    atoms_eta: np.ndarray
    phases_eta: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("atoms_xi", "phases_xi", "atoms_eta", "phases_eta"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))

    @property
    def M(self):
        return self.atoms_xi.shape[0]

    @property
    def amplitude(self):
        return np.sqrt(2.0 / self.M)

    def evaluate(self, x, backend=None):
        """Return ``(xi, eta, grad_xi, grad_eta)`` at one point or an (P, 3) array."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = x.reshape(-1, 3)
        xi, gxi = _kernels.atom_sum_points(self.atoms_xi, self.phases_xi, pts, self.amplitude, backend)
        eta, geta = _kernels.atom_sum_points(self.atoms_eta, self.phases_eta, pts, self.amplitude, backend)
        if single:
            return float(xi[0]), float(eta[0]), gxi[0], geta[0]
        return xi, eta, gxi, geta

    def shifted(self, delta):
        """Realization ``y -> psi(y + delta)``: same atoms, phases advanced by <k, delta>."""
        delta = np.asarray(delta, dtype=float)
        return FieldRealization(
            self.spectrum,
            self.atoms_xi, self.phases_xi + self.atoms_xi @ delta,
            self.atoms_eta, self.phases_eta + self.atoms_eta @ delta,
            self.seed,
        )


def new_realization(s, M=DEFAULT_M, seed=0):
    """Draw a realization with M atoms per component from spectrum ``s``."""
    M = int(M)
    if M < 1:
        raise ParameterOutOfRange("M", M, "M >= 1")
    rng = np.random.default_rng(int(seed) & _MASK64)
    kx = sample_wavevector(s, rng, M)
    tx = rng.uniform(0.0, 2 * np.pi, M)
    ke = sample_wavevector(s, rng, M)
    te = rng.uniform(0.0, 2 * np.pi, M)
    return FieldRealization(s, kx, tx, ke, te, int(seed) & _MASK64)


def ensemble_realization(s, M, master_seed, index):
    """Realization ``index`` of the ensemble keyed by ``master_seed``."""
    return new_realization(s, M, mix_seed(master_seed, index))


@dataclass(frozen=True, eq=False)
class GridSample:
    """Vertex samples of (xi, eta) on the grid ``-n + h*i``, i = 0..dims-1."""

    n: float
    h: float
    dims: tuple
    xi: np.ndarray
    eta: np.ndarray
    grad_xi: np.ndarray = None
    grad_eta: np.ndarray = None
    seed: int = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.xi.shape != tuple(self.dims) or self.eta.shape != tuple(self.dims):
            raise ValueError("sample arrays do not match dims")
        if not (np.all(np.isfinite(self.xi)) and np.all(np.isfinite(self.eta))):
            raise ValueError("non-finite grid samples")

    @property
    def origin(self):
        return np.full(3, -float(self.n))

    def axis(self, i=0):
        return -self.n + self.h * np.arange(self.dims[i])

    def points(self):
        ax = [self.axis(i) for i in range(3)]
        g = np.meshgrid(*ax, indexing="ij")
        return np.stack(g, axis=-1).reshape(-1, 3)

    def export(self, path, fmt="binary"):
        """Write samples to ``path`` (``.bin`` float64 C-order, or ``.csv``) plus a JSON sidecar."""
        path = Path(path)
        if fmt == "binary":
            np.stack([self.xi, self.eta]).astype("<f8").tofile(path)
        elif fmt == "csv":
            pts = self.points()
            data = np.column_stack([pts, self.xi.ravel(), self.eta.ravel()])
            np.savetxt(path, data, delimiter=",", header="x,y,z,xi,eta", comments="", fmt="%.17g")
        else:
            raise ValueError(f"unknown export format {fmt!r}")
        side = {"dims": list(self.dims), "h": self.h, "n": self.n, "seed": self.seed,
                "format": fmt, "layout": "xi then eta, C order (x slowest)" if fmt == "binary" else "rows"}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, indent=2))
        return path


def grid_dims(n, h):
    """Per-axis vertex count for the box [-n, n] at spacing h."""
    n = float(n)
    h = float(h)
    if not h > 0:
        raise ParameterOutOfRange("h", h, "(0, inf)")
    if not n > 0:
        raise ParameterOutOfRange("n", n, "(0, inf)")
    cells = 2.0 * n / h
    c = round(cells)
    if abs(cells - c) > 1e-9 * max(1.0, cells):
        raise ParameterOutOfRange("h", h, "2n/h must be an integer")
    d = int(c) + 1
    if d > MAX_VERTICES_PER_AXIS or d ** 3 > MAX_VERTICES:
        raise GridTooLarge(f"grid of {d}^3 vertices exceeds the cap ({MAX_VERTICES_PER_AXIS} per axis)")
    return d


def _cis(phase):
    # real cos and sin are faster than the complex exponential
    out = np.empty(phase.shape, dtype=complex)
    out.real = np.cos(phase)
    out.imag = np.sin(phase)
    return out


def _grid_component(k, theta, amp, ax, with_grad, block_elems=1 << 16):
    """Re sum_j e^{i k_j1 x} e^{i k_j2 y} (e^{i k_j3 z} e^{i theta_j}) via blocked GEMM.

    Only the real part is needed. Viewing the complex left factor as
    interleaved (Re, Im) floats and interleaving the right factor as
    (Re, -Im) turns each block into one real GEMM with inner dimension 2M.
    """
    d = ax.size
    m = k.shape[0]
    ex = _cis(np.outer(ax, k[:, 0]))
    ey = _cis(np.outer(ax, k[:, 1]))
    ez = _cis(np.outer(ax, k[:, 2]) + theta[None, :])
    cols = [ez]
    if with_grad:
        cols += [ez * (1j * k[:, c])[None, :] for c in range(3)]
    rhs = np.concatenate(cols, axis=0).T  # (M, ncomp*d)
    ncomp = len(cols)
    right = np.empty((2 * m, ncomp * d))
    right[0::2] = rhs.real
    right[1::2] = -rhs.imag
    out = np.empty((d, d, ncomp * d))
    step = max(1, block_elems // max(1, d * m))
    for i0 in range(0, d, step):
        i1 = min(d, i0 + step)
        rows = (i1 - i0) * d
        ab = (ex[i0:i1, None, :] * ey[None, :, :]).reshape(rows, m)
        np.matmul(ab.view(np.float64), right, out=out[i0:i1].reshape(rows, ncomp * d))
    out *= amp
    val = out[:, :, :d]
    if not with_grad:
        return np.ascontiguousarray(val), None
    grad = np.stack([out[:, :, (c + 1) * d:(c + 2) * d] for c in range(3)], axis=-1)
    return np.ascontiguousarray(val), grad


def sample_grid(fr, n, h, with_grad=False):
    """Sample xi and eta at the vertices of the grid covering [-n, n]^3."""
    d = grid_dims(n, h)
    ax = -float(n) + float(h) * np.arange(d)
    xi, gxi = _grid_component(fr.atoms_xi, fr.phases_xi, fr.amplitude, ax, with_grad)
    eta, geta = _grid_component(fr.atoms_eta, fr.phases_eta, fr.amplitude, ax, with_grad)
    return GridSample(float(n), float(h), (d, d, d), xi, eta, gxi, geta, fr.seed)


def analytic_grid(fn, n, h):
    """GridSample of a deterministic complex field ``fn(x, y, z) -> complex``."""
    d = grid_dims(n, h)
    ax = -float(n) + float(h) * np.arange(d)
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    w = np.asarray(fn(x, y, z), dtype=complex)
    return GridSample(float(n), float(h), (d, d, d), np.ascontiguousarray(w.real),
                      np.ascontiguousarray(w.imag))


@dataclass(frozen=True)
class OracleSamples:
    samples: np.ndarray
    jitter: float
    points: np.ndarray


def covariance_matrix(s, points):
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    diff = pts[:, None, :] - pts[None, :, :]
    c = anisotropic_covariance(s, diff.reshape(-1, 3)).reshape(len(pts), len(pts))
    return 0.5 * (c + c.T)


def regularized_cholesky(c):
    """Lower Cholesky factor with escalating diagonal jitter; returns (L, jitter)."""
    jit = JITTER_START
    eye = np.eye(c.shape[0])
    while jit <= JITTER_MAX * (1 + 1e-9):
        try:
            return linalg.cholesky(c + jit * eye, lower=True, check_finite=True), jit
        except linalg.LinAlgError:
            jit *= 10.0
    raise NotPositiveDefinite(f"covariance not positive definite with jitter up to {JITTER_MAX:g}")


def exact_gaussian_oracle(s, points, seed=0, size=1):
    """Exactly Gaussian draws of xi at ``points`` (shape (size, P))."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) > MAX_ORACLE_POINTS:
        raise ParameterOutOfRange("points", len(pts), f"at most {MAX_ORACLE_POINTS}")
    chol, jit = regularized_cholesky(covariance_matrix(s, pts))
    rng = np.random.default_rng(int(seed) & _MASK64)
    z = rng.standard_normal((int(size), len(pts)))
    return OracleSamples(z @ chol.T, jit, pts)
