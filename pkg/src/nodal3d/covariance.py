"""Radial covariance profiles, the second-chaos functional and box covariograms.

For an isotropic spectrum ``r(x) = gamma(|x|)`` with

    gamma(t) = 4 pi int sinc(rho t) f(rho) d rho .

Closed forms are used for the monochromatic, Bargmann-Fock and gamma-type
models; the black-body and power-law profiles are computed by quadrature
with analytically differentiated kernels. Near ``t = 0`` everything
switches to even Taylor series built from the spectral moments.
"""

from functools import lru_cache
from math import comb, factorial, pi, sqrt

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import roots_jacobi

from ._accel import use_numba
from ._kernels import sinc_moments_nb
from .errors import QuadratureFailure
from .quadrature import gauss_legendre, panel_nodes
from .spectrum import AnisotropicSpectrum, RadialSpectrum, second_moment

T_SERIES = 1e-3
SERIES_TERMS = 6
_J0_SERIES_X = 0.5
_J0_TERMS = 12
_J0_COEF = np.array([(-1) ** k / factorial(2 * k + 1) for k in range(_J0_TERMS)])
_CHUNK = 1 << 22


def _j0_series(x, terms=_J0_TERMS):
    x2 = x * x
    s0 = np.zeros_like(x)
    s1 = np.zeros_like(x)
    s2 = np.zeros_like(x)
    for k in range(terms - 1, -1, -1):
        c = (-1) ** k / factorial(2 * k + 1)
        s0 = s0 * x2 + c
        if k >= 1:
            s1 = s1 * x2 + c * 2 * k
            s2 = s2 * x2 + c * 2 * k * (2 * k - 1)
    # s1 and s2 are polynomials in x2 starting at the k=1 term
    return s0, s1 * x, s2


def j0_family(x):
    """sinc(x) = sin(x)/x and its first two derivatives, stable at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < _J0_SERIES_X
    xs = np.where(small, 1.0, x)
    sx, cx = np.sin(xs), np.cos(xs)
    f0 = sx / xs
    f1 = (xs * cx - sx) / xs**2
    f2 = ((2 - xs**2) * sx - 2 * xs * cx) / xs**3
    if np.any(small):
        s0, s1, s2 = _j0_series(np.where(small, x, 0.0))
        f0 = np.where(small, s0, f0)
        f1 = np.where(small, s1, f1)
        f2 = np.where(small, s2, f2)
    return f0, f1, f2


class CovarianceProfile:
    """Radial covariance ``gamma`` with derivatives for an isotropic spectrum."""

    def __init__(self, spectrum):
        if isinstance(spectrum, AnisotropicSpectrum):
            raise TypeError("CovarianceProfile is defined for isotropic spectra; use anisotropic_covariance")
        self.spectrum = spectrum
        self.lam = second_moment(spectrum).lam
        mu = [spectrum.radial_moment(2 * k) for k in range(SERIES_TERMS)]
        self._series = np.array([(-1) ** k * mu[k] / factorial(2 * k + 1) for k in range(SERIES_TERMS)])
        self._rules = {}
        if spectrum.model == "gamma":
            self._gamma_polys = _gamma_type_polys(spectrum.p)

    def __repr__(self):
        return f"CovarianceProfile({self.spectrum!r})"

    # -- series branch -------------------------------------------------
    def series(self, t):
        """Even Taylor expansions (gamma, gamma', gamma'', gamma'/t)."""
        t = np.asarray(t, dtype=float)
        t2 = t * t
        c = self._series
        g0 = np.zeros_like(t)
        g1t = np.zeros_like(t)
        g2 = np.zeros_like(t)
        for k in range(SERIES_TERMS - 1, -1, -1):
            g0 = g0 * t2 + c[k]
            if k >= 1:
                g1t = g1t * t2 + c[k] * 2 * k
                g2 = g2 * t2 + c[k] * 2 * k * (2 * k - 1)
        return g0, g1t * t, g2, g1t

    # -- full evaluation ------------------------------------------------
    def gamma_profile(self, t):
        """Return ``(gamma, gamma', gamma'')`` at radii ``t >= 0``."""
        g0, g1, g2, _ = self._profile(t)
        return g0, g1, g2

    def _profile(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        g0, g1, g2 = self._direct(t)
        small = t < T_SERIES
        with np.errstate(divide="ignore", invalid="ignore"):
            g1t = g1 / t
        if np.any(small):
            s0, s1, s2, s1t = self.series(np.where(small, t, 0.0))
            g0 = np.where(small, s0, g0)
            g1 = np.where(small, s1, g1)
            g2 = np.where(small, s2, g2)
            g1t = np.where(small, s1t, g1t)
        return g0, g1, g2, g1t

    def _direct(self, t):
        s = self.spectrum
        if s.model == "monochromatic":
            k = s.kappa
            f0, f1, f2 = j0_family(k * t)
            return f0, k * f1, k * k * f2
        if s.model == "bargmann_fock":
            e = np.exp(-0.5 * t * t)
            return e, -t * e, (t * t - 1.0) * e
        if s.model == "gamma":
            return self._gamma_type(t)
        return self._quadrature(t)

    def _gamma_type(self, t):
        p, b = self.spectrum.p, self.spectrum.beta
        n0, n1, n2 = self._gamma_polys
        x = t / b
        d = 1.0 + x * x
        g0 = np.polynomial.polynomial.polyval(x, n0) / (p * d**p)
        g1 = np.polynomial.polynomial.polyval(x, n1) / (p * d ** (p + 1)) / b
        g2 = np.polynomial.polynomial.polyval(x, n2) / (p * d ** (p + 2)) / b**2
        return g0, g1, g2

    def _quadrature(self, t):
        t = np.asarray(t, dtype=float)
        flat_t = np.ascontiguousarray(t.ravel())
        if flat_t.size == 0:
            return [np.empty_like(t) for _ in range(3)]
        rho, wts = self._rule(float(flat_t.max()))
        if use_numba():
            res = sinc_moments_nb(flat_t, rho, wts, _J0_COEF, _J0_SERIES_X)
            return [res[i].reshape(t.shape) for i in range(3)]
        out = [np.empty_like(flat_t) for _ in range(3)]
        step = max(1, _CHUNK // len(rho))
        for i in range(0, flat_t.size, step):
            tt = flat_t[i:i + step]
            f0, f1, f2 = j0_family(tt[:, None] * rho[None, :])
            out[0][i:i + step] = f0 @ wts
            out[1][i:i + step] = f1 @ (wts * rho)
            out[2][i:i + step] = f2 @ (wts * rho * rho)
        return [o.reshape(t.shape) for o in out]

    def _rule(self, t_max):
        bucket = 8.0
        while bucket < t_max:
            bucket *= 2.0
        if bucket not in self._rules:
            rule = self._build_rule(bucket)
            fine = self._build_rule(bucket, refine=2)
            probe = np.linspace(0.0, bucket, 65)
            a = _apply_rule(rule, probe)
            b = _apply_rule(fine, probe)
            if np.max(np.abs(a - b)) > 1e-10 * max(1.0, self.lam):
                raise QuadratureFailure(f"covariance quadrature not converged at t={bucket}")
            self._rules[bucket] = rule
        return self._rules[bucket]

    def _build_rule(self, t_max, refine=1):
        s = self.spectrum
        if s.model == "power_law":
            n = refine * (48 + int(0.75 * t_max))
            x, w = roots_jacobi(n, 0.0, -s.beta)
            rho = 0.5 * (x + 1.0)
            wts = w * 2.0 ** (s.beta - 1.0) * (1.0 - s.beta)
            return rho, wts
        lo, hi = s.support
        panels = refine * max(8, int(np.ceil((hi - lo) * (t_max + 2.0) / pi)))
        rho, w = panel_nodes(np.linspace(lo, hi, panels + 1), 16)
        return rho, w * 4 * pi * s.density(rho)

    # -- Cartesian quantities -------------------------------------------
    def cartesian(self, x):
        """``r``, gradient ``r'_i`` and Hessian ``r''_ij`` at points ``x`` (..., 3)."""
        x = np.asarray(x, dtype=float)
        t = np.linalg.norm(x, axis=-1)
        g0, g1, g2, g1t = self._profile(t)
        safe = np.where(t > 0, t, 1.0)
        u = x / safe[..., None]
        grad = g1t[..., None] * x
        uu = u[..., :, None] * u[..., None, :]
        hess = (g2 - g1t)[..., None, None] * uu + g1t[..., None, None] * np.eye(3)
        return g0, grad, hess

    def dr(self, t):
        """Second-chaos functional D(t) in radial form."""
        g0, g1, g2, g1t = self._profile(t)
        lam = self.lam
        return g0**2 + (2.0 / (3 * lam)) * (g1t**2 / (3 * lam) - g1**2) + g2**2 / (9 * lam**2)

    def dr_cartesian(self, x):
        r, grad, hess = self.cartesian(x)
        lam = self.lam
        return r**2 - (2.0 / (3 * lam)) * (grad**2).sum(-1) + (hess**2).sum((-1, -2)) / (9 * lam**2)

    def envelope(self, x):
        r, grad, hess = self.cartesian(x)
        lam = self.lam
        a = np.abs(r)
        b = np.abs(grad).max(-1) / sqrt(lam)
        c = np.abs(hess).max((-1, -2)) / lam
        return np.maximum(a, np.maximum(b, c))


def _apply_rule(rule, t):
    rho, w = rule
    step = max(1, _CHUNK // len(rho))
    parts = []
    for i in range(0, t.size, step):
        f0, f1, f2 = j0_family(t[i:i + step, None] * rho[None, :])
        parts.append(np.stack([f0 @ w, f1 @ (w * rho), f2 @ (w * rho * rho)]))
    return np.concatenate(parts, axis=1).ravel()


def _gamma_type_polys(p):
    """Numerator polynomials (in s = t/beta) of gamma, d gamma/ds, d2 gamma/ds2."""
    P = np.polynomial.polynomial
    n0 = np.zeros(p)
    for j in range(1, p + 1, 2):
        n0[j - 1] = (-1) ** ((j - 1) // 2) * comb(p, j)
    d = np.array([1.0, 0.0, 1.0])
    s = np.array([0.0, 1.0])
    n1 = P.polysub(P.polymul(P.polyder(n0), d), 2 * p * P.polymul(s, n0))
    n2 = P.polysub(P.polymul(P.polyder(n1), d), 2 * (p + 1) * P.polymul(s, n1))
    return n0, n1, n2


def gamma_profile(profile, t):
    return profile.gamma_profile(t)


def envelope_R(profile, x):
    """Normalized envelope max(|r|, |r'_i|/sqrt(lam), |r''_ij|/lam)."""
    return profile.envelope(x)


def dr_functional(profile, t):
    return profile.dr(t)


def anisotropic_covariance(spectrum, x):
    """Covariance ``r(x) = gamma_base(|A^T x|)`` of a linearly transformed spectrum."""
    base = spectrum.base if isinstance(spectrum, AnisotropicSpectrum) else spectrum
    prof = _profile_for(base)
    x = np.asarray(x, dtype=float)
    if isinstance(spectrum, AnisotropicSpectrum):
        x = x @ spectrum.transform
    return prof.gamma_profile(np.linalg.norm(x, axis=-1))[0]


@lru_cache(maxsize=64)
def _profile_for(spectrum):
    return CovarianceProfile(spectrum)


def profile_for(spectrum):
    """Shared (cached) profile for a spectrum."""
    return _profile_for(spectrum)


# ---------------------------------------------------------------------------
# box covariogram

def box_covariogram(n, x):
    """vol(Q_n cap (Q_n - x)) for the cube Q_n = [-n, n]^3."""
    x = np.abs(np.asarray(x, dtype=float))
    return np.prod(np.maximum(2.0 * n - x, 0.0), axis=-1)


def _smoothstep_rule(z0, z1, m):
    x, w = gauss_legendre(m)
    u = 0.5 * (x + 1.0)
    g = u * u * (3.0 - 2.0 * u)
    dg = 6.0 * u * (1.0 - u)
    return z0 + (z1 - z0) * g, 0.5 * w * dg * (z1 - z0)


def _unit_cube_average(rho, order):
    """Sphere average of c(rho u) = prod(1 - rho|u_i|/2)_+ for one radius."""
    a = 0.5 * rho
    if a == 0.0:
        return 1.0
    brk = {0.0, 1.0}
    if a > 1.0:
        brk.add(1.0 / a)
        brk.add(sqrt(1.0 - 1.0 / a**2))
    if a > sqrt(2.0):
        brk.add(sqrt(1.0 - 2.0 / a**2))
    brk = sorted(b for b in brk if 0.0 <= b <= 1.0)
    xg, wg = gauss_legendre(order)
    total = 0.0
    for z0, z1 in zip(brk[:-1], brk[1:]):
        if z1 <= z0:
            continue
        z, wz = _smoothstep_rule(z0, z1, order)
        fz = np.maximum(1.0 - a * z, 0.0)
        s = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        as_ = a * s
        with np.errstate(divide="ignore", invalid="ignore"):
            lo = np.where(as_ > 1.0, np.arccos(np.minimum(1.0, 1.0 / as_)), 0.0)
            hi = np.where(as_ > 1.0, np.arcsin(np.minimum(1.0, 1.0 / as_)), 0.5 * pi)
        width = np.maximum(hi - lo, 0.0)
        phi = lo[:, None] + 0.5 * width[:, None] * (xg[None, :] + 1.0)
        g = np.maximum(1.0 - as_[:, None] * np.cos(phi), 0.0) * np.maximum(1.0 - as_[:, None] * np.sin(phi), 0.0)
        inner = 0.5 * width * (g @ wg)
        total += float(np.dot(wz, fz * inner))
    return total * 2.0 / pi


def radialize(n, rho, order=32):
    """Normalized radial covariogram C_n(rho) by direct sphere quadrature."""
    r = np.atleast_1d(np.asarray(rho, dtype=float)) / n
    out = np.array([_unit_cube_average(v, order) if v < 2 * sqrt(3.0) else 0.0 for v in r])
    return out if np.ndim(rho) else float(out[0])


CUBE_KINKS = (2.0, 2.0 * sqrt(2.0), 2.0 * sqrt(3.0))


class RadialCovariogram:
    """Spline table of C_1 on [0, 2 sqrt 3]; C_n(rho) = C_1(rho / n).

    One cubic spline per smooth piece, split at the radii where the sphere
    starts to leave the cube's faces, edges and corners.
    """

    def __init__(self, points=1025, order=48):
        self._pieces = []
        lo = 0.0
        for hi in CUBE_KINKS:
            grid = np.linspace(lo, hi, points)
            vals = np.array([_unit_cube_average(v, order) for v in grid])
            if hi == CUBE_KINKS[-1]:
                vals[-1] = 0.0
            self._pieces.append((lo, hi, CubicSpline(grid, vals)))
            lo = hi

    def __call__(self, rho, n=1.0):
        y = np.asarray(rho, dtype=float) / n
        out = np.zeros_like(y)
        for lo, hi, spl in self._pieces:
            m = (y >= lo) & (y <= hi)
            if np.any(m):
                out[m] = spl(y[m])
        return np.clip(out, 0.0, 1.0)


@lru_cache(maxsize=1)
def unit_covariogram():
    return RadialCovariogram()
