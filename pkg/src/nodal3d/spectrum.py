"""Power spectra of isotropic 3D random waves and their wavevector samplers.

A spectrum is described by its radial density ``f`` with the convention
that ``4*pi*f`` is the probability density of the wavevector modulus
``|k|``; the monochromatic model is the atom ``delta_kappa / (4 pi)``.
All catalog models have unit mass ``4*pi*int f = 1``.
"""

from dataclasses import dataclass, field
from functools import cached_property
from math import factorial, gamma as gamma_fn, pi

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .errors import DivergentMoment, ParameterOutOfRange, QuadratureFailure

MODELS = ("monochromatic", "bargmann_fock", "gamma", "black_body", "power_law")

BLACK_BODY_C = 15.0 / (4.0 * pi**5)

_CDF_POINTS = 4096


@dataclass(frozen=True)
class RadialSpectrum:
    """Isotropic power spectrum from the model catalog.

    Use :func:`make_model` rather than calling the constructor.
    """

    model: str
    kappa: float = 1.0
    p: int = 1
    beta: float = 1.0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def is_atomic(self):
        return self.model == "monochromatic"

    @property
    def params(self):
        if self.model == "monochromatic":
            return {"kappa": self.kappa}
        if self.model == "gamma":
            return {"p": self.p, "beta": self.beta}
        if self.model == "power_law":
            return {"beta": self.beta}
        return {}

    def density(self, rho):
        """Radial density f(rho); not defined for the monochromatic atom."""
        rho = np.asarray(rho, dtype=float)
        if self.model == "bargmann_fock":
            return (2 * pi) ** -1.5 * rho**2 * np.exp(-0.5 * rho**2)
        if self.model == "gamma":
            p, b = self.p, self.beta
            return b ** (p + 1) / (4 * pi * factorial(p)) * rho**p * np.exp(-b * rho)
        if self.model == "black_body":
            with np.errstate(divide="ignore", invalid="ignore"):
                out = BLACK_BODY_C * rho**3 / np.expm1(rho)
            return np.where(rho > 0, out, 0.0)
        if self.model == "power_law":
            b = self.beta
            inside = (rho > 0) & (rho < 1)
            with np.errstate(divide="ignore"):
                out = (1 - b) / (4 * pi) * np.where(inside, rho, 1.0) ** (-b)
            return np.where(inside, out, 0.0)
        raise TypeError("monochromatic spectrum is an atom and has no density")

    @property
    def support(self):
        """Radial interval carrying the mass, truncated at 1e-16 of the peak."""
        if self.model == "monochromatic":
            return (self.kappa, self.kappa)
        if self.model == "power_law":
            return (0.0, 1.0)
        return (0.0, self._cache_get("rho_max", self._find_cutoff))

    def _cache_get(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def _find_cutoff(self):
        grid = np.linspace(1e-6, 400.0, 400001)
        vals = self.density(grid)
        peak = vals.max()
        above = np.nonzero(vals >= 1e-16 * peak)[0]
        return float(grid[above[-1]])

    def radial_moment(self, power):
        """``4*pi*int rho**power f(rho) d rho`` = E|k|**power."""
        if self.model == "monochromatic":
            return float(self.kappa**power)
        key = ("moment", power)
        if key in self._cache:
            return self._cache[key]
        if self.model == "gamma":
            p, b = self.p, self.beta
            val = gamma_fn(p + 1 + power) / (factorial(p) * b**power)
        elif self.model == "bargmann_fock":
            # |k| is chi-distributed with 3 degrees of freedom
            val = 2 ** (power / 2) * gamma_fn(1.5 + power / 2) / gamma_fn(1.5)
        else:
            val = _quad_positive(lambda r: 4 * pi * r**power * self.density(r), *self.support)
            if not np.isfinite(val):
                raise DivergentMoment(f"moment {power} of {self.model} diverges")
        self._cache[key] = float(val)
        return float(val)

    @cached_property
    def radial_cdf(self):
        """Monotone interpolant rho -> P(|k| <= rho) tabulated at 4096 points."""
        lo, hi = self.support
        rho = np.linspace(lo, hi, _CDF_POINTS)
        # cumulative Gauss-Legendre over each cell, exact to quadrature precision
        x, w = np.polynomial.legendre.leggauss(8)
        a, b = rho[:-1, None], rho[1:, None]
        nodes = a + 0.5 * (b - a) * (x + 1)
        cell = (0.5 * (b - a) * w * 4 * pi * self.density(nodes)).sum(axis=1)
        cdf = np.concatenate([[0.0], np.cumsum(cell)])
        cdf /= cdf[-1]
        return rho, cdf

    @cached_property
    def _inverse_cdf(self):
        rho, cdf = self.radial_cdf
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        return PchipInterpolator(cdf[keep], rho[keep])

    def sample_radius(self, rng, size):
        if self.model == "monochromatic":
            return np.full(size, float(self.kappa))
        u = rng.random(size)
        if self.model == "power_law":
            return u ** (1.0 / (1.0 - self.beta))
        return self._inverse_cdf(u)


@dataclass(frozen=True)
class AnisotropicSpectrum:
    """Isotropic base spectrum pushed forward by the linear map k -> A k."""

    base: RadialSpectrum
    transform: np.ndarray

    def __post_init__(self):
        a = np.array(self.transform, dtype=float)
        if a.shape != (3, 3):
            raise ParameterOutOfRange("transform", a.shape, "3x3 matrix")
        if abs(np.linalg.det(a)) < 1e-14:
            raise ParameterOutOfRange("transform", "singular", "det(A) != 0")
        a.setflags(write=False)
        object.__setattr__(self, "transform", a)

    @property
    def model(self):
        return self.base.model

    @property
    def params(self):
        out = dict(self.base.params)
        out["transform"] = self.transform.tolist()
        return out


@dataclass(frozen=True)
class SpectralMoments:
    lam: float
    matrix: np.ndarray
    eigenvalues: tuple


def make_model(name, **params):
    """Build a catalog spectrum.

    >>> make_model("gamma", p=2, beta=1.0).model
    'gamma'
    """
    name = str(name).lower().replace("-", "_")
    aliases = {"bf": "bargmann_fock", "bargmannfock": "bargmann_fock", "mono": "monochromatic",
               "gammatype": "gamma", "gamma_type": "gamma", "blackbody": "black_body",
               "powerlaw": "power_law"}
    name = aliases.get(name, name)
    if name not in MODELS:
        raise ParameterOutOfRange("model", name, "one of " + ", ".join(MODELS))
    allowed = {"monochromatic": {"kappa"}, "gamma": {"p", "beta"}, "power_law": {"beta"}}
    extra = set(params) - allowed.get(name, set())
    if extra:
        raise ParameterOutOfRange(sorted(extra)[0], params[sorted(extra)[0]], f"not a parameter of {name}")
    if name == "monochromatic":
        kappa = float(params.get("kappa", 1.0))
        if not kappa > 0:
            raise ParameterOutOfRange("kappa", kappa, "(0, inf)")
        return RadialSpectrum(name, kappa=kappa)
    if name == "gamma":
        p = params.get("p", 1)
        beta = float(params.get("beta", 1.0))
        if int(p) != p or p < 1:
            raise ParameterOutOfRange("p", p, "integers >= 1")
        if not beta > 0:
            raise ParameterOutOfRange("beta", beta, "(0, inf)")
        return RadialSpectrum(name, p=int(p), beta=beta)
    if name == "power_law":
        beta = float(params.get("beta", 0.2))
        if not 0 < beta < 1:
            raise ParameterOutOfRange("beta", beta, "(0, 1)")
        return RadialSpectrum(name, beta=beta)
    return RadialSpectrum(name)


def powerlaw_in_scaling_regime(s):
    """True when the variance scaling results apply (beta < 1/4)."""
    return s.model == "power_law" and s.beta < 0.25


def _quad_positive(fn, a, b):
    pts = None
    if np.isfinite(b) and b - a > 10:
        pts = list(np.linspace(a, b, 12)[1:-1])
    val, err, info = integrate.quad(fn, a, b, epsabs=0.0, epsrel=1e-12, limit=500, points=pts,
                                    full_output=True)[:3]
    if err > 1e-10 * max(abs(val), 1e-300) and not (err < 1e-13):
        raise QuadratureFailure(f"radial quadrature did not converge (err={err:.3g})")
    return val


def normalization_mass(s):
    """Total mass ``4*pi*Pi_rad(R+)``; equals 1 for every catalog model."""
    base = s.base if isinstance(s, AnisotropicSpectrum) else s
    if base.is_atomic:
        return 4 * pi * (1.0 / (4 * pi))
    return _quad_positive(lambda r: 4 * pi * base.density(r), *base.support)


def second_moment(s):
    """Second spectral moment ``lambda = -gamma''(0)`` and the matrix ``-r''(0)``."""
    if isinstance(s, AnisotropicSpectrum):
        lam = second_moment(s.base).lam
        a = s.transform
        mat = a @ (lam * np.eye(3)) @ a.T
    else:
        lam = s.radial_moment(2) / 3.0
        mat = lam * np.eye(3)
    mat = 0.5 * (mat + mat.T)
    eig = tuple(float(v) for v in np.sort(np.linalg.eigvalsh(mat)))
    mat.setflags(write=False)
    return SpectralMoments(lam=float(lam), matrix=mat, eigenvalues=eig)


def sample_directions(rng, size):
    g = rng.standard_normal((size, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_wavevector(s, rng, size=None):
    """Draw wavevectors from the probability law ``Pi(dk)/|k|**2``.

    Returns an array of shape (3,) when ``size`` is None, else (size, 3).
    """
    n = 1 if size is None else int(size)
    base = s.base if isinstance(s, AnisotropicSpectrum) else s
    rho = base.sample_radius(rng, n)
    k = rho[:, None] * sample_directions(rng, n)
    if isinstance(s, AnisotropicSpectrum):
        k = k @ s.transform.T
    return k[0] if size is None else k
