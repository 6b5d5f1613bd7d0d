"""Quadrature helpers shared by the spectral and variance code.

Everything here works on vectorized integrands ``f(x) -> ndarray``.
"""

from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure


@lru_cache(maxsize=None)
def gauss_legendre(m):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, m=16):
    """Nodes and weights of a composite Gauss-Legendre rule on ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(m)
    a = edges[:-1, None]
    b = edges[1:, None]
    half = 0.5 * (b - a)
    nodes = (a + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return nodes, weights


def _refine(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * len(edges) - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def integrate(f, a, b, breakpoints=(), panel_width=None, m=16, rtol=1e-10, atol=1e-300,
              max_panels=1 << 16):
    """Composite Gauss-Legendre integral of ``f`` over ``[a, b]``.

    The panel set is halved until two successive estimates agree to
    ``rtol``. Breakpoints (kinks of the integrand) always sit on panel
    edges. Raises QuadratureFailure when ``max_panels`` is exceeded.
    """
    if b <= a:
        return 0.0
    pts = [a] + sorted(p for p in breakpoints if a < p < b) + [b]
    edges = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        k = 1 if panel_width is None else max(1, int(np.ceil((hi - lo) / panel_width)))
        edges.append(np.linspace(lo, hi, k + 1)[:-1])
    edges = np.concatenate(edges + [np.array([b])])

    def est(e):
        x, w = panel_nodes(e, m)
        return float(np.dot(w, f(x)))

    prev = est(edges)
    while True:
        edges = _refine(edges)
        if len(edges) - 1 > max_panels:
            raise QuadratureFailure(f"no convergence on [{a}, {b}] with {max_panels} panels")
        cur = est(edges)
        if abs(cur - prev) <= rtol * abs(cur) + atol:
            return cur
        prev = cur


def wynn_epsilon(partial_sums):
    """Wynn's epsilon extrapolation of a sequence of partial sums."""
    s = np.asarray(partial_sums, dtype=float)
    n = len(s)
    e_prev = np.zeros(n + 1)
    e_cur = s.copy()
    best = s[-1]
    for k in range(1, n):
        diff = e_cur[1:] - e_cur[:-1]
        with np.errstate(divide="ignore"):
            nxt = e_prev[1:len(e_cur)] + np.where(diff != 0, 1.0 / np.where(diff != 0, diff, 1.0), np.inf)
        e_prev, e_cur = e_cur, nxt
        if k % 2 == 0 and len(e_cur) and np.isfinite(e_cur[-1]):
            best = e_cur[-1]
        if len(e_cur) < 2:
            break
    return float(best)


def iterated_aitken(partial_sums):
    s = np.asarray(partial_sums, dtype=float)
    while len(s) >= 3:
        d1 = s[1:-1] - s[:-2]
        d2 = s[2:] - 2.0 * s[1:-1] + s[:-2]
        if np.any(d2 == 0):
            break
        s = s[2:] - (s[2:] - s[1:-1]) ** 2 / d2
    return float(s[-1])


def oscillatory_tail(f, a, half_period, blocks=40, m=24, tol=1e-12):
    """Integral of ``f`` over ``[a, inf)`` for an integrand that alternates
    in sign with the given half period and decays algebraically.

    Integrates block by block and accelerates the alternating partial sums
    with iterated Aitken; the Wynn epsilon estimate is used as a
    consistency check.
    """
    edges = a + half_period * np.arange(blocks + 1)
    x, w = gauss_legendre(m)
    lo = edges[:-1, None]
    half = 0.5 * half_period
    nodes = lo + half * (x[None, :] + 1.0)
    terms = (f(nodes.ravel()).reshape(nodes.shape) * w[None, :]).sum(axis=1) * half
    partial = np.cumsum(terms)
    ait = iterated_aitken(partial[-16:])
    eps = wynn_epsilon(partial[-16:])
    if not np.isfinite(ait) or abs(ait - eps) > max(tol, 1e-6 * abs(ait)):
        raise QuadratureFailure(f"tail acceleration disagrees: aitken={ait}, wynn={eps}")
    return ait
