"""Hermite-chaos machinery and second-chaos variance analytics.

Component order of the normalized vector used throughout::

    Ybar = (xi, eta, d1 xi, d2 xi, d3 xi, d1 eta, d2 eta, d3 eta) with the
    gradient entries divided by sqrt(lam).

The second-chaos variance of the nodal length over a box Q is

    Var(I2(Q)) = pi^-2 int vol(Q cap Q-x) Dr(x) dx,
    Dr = r^2 - (2/(3 lam)) |r'|^2 + |r''|^2 / (9 lam^2),

and Var(length) >= lam^2 Var(I2(Q)).
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial, pi, sqrt

import numpy as np
from scipy import integrate as sp_integrate

from .covariance import CUBE_KINKS, profile_for, unit_covariogram
from .errors import DivergentIntegral, IndexTooLarge, ParameterOutOfRange, QuadratureFailure
from .quadrature import gauss_legendre, integrate, oscillatory_tail
from .spectrum import AnisotropicSpectrum, make_model, second_moment
from .synthesis import mix_seed

MEHLER_MAX_ORDER = 6
NDIM = 8
A_CHUNK = 1 << 16


# ---------------------------------------------------------------------------
# Hermite polynomials

def hermite(n, x):
    """Probabilists' Hermite polynomial by H_n = x H_{n-1} - (n-1) H_{n-2}."""
    if n < 0:
        raise ParameterOutOfRange("n", n, "n >= 0")
    x = np.asarray(x, dtype=float)
    h0 = np.ones_like(x)
    if n == 0:
        return h0
    h1 = x.copy()
    for k in range(2, n + 1):
        h0, h1 = h1, x * h1 - (k - 1) * h0
    return h1


def hermite_multi(alpha, y):
    """Tensor Hermite polynomial prod_i H_{alpha_i}(y_i); ``y`` has shape (..., len(alpha))."""
    y = np.asarray(y, dtype=float)
    out = np.ones(y.shape[:-1])
    for i, a in enumerate(alpha):
        if a:
            out = out * hermite(int(a), y[..., i])
    return out


def multi_factorial(alpha):
    out = 1
    for a in alpha:
        out *= factorial(int(a))
    return out


def unit_index(k, dim=NDIM, times=1):
    """Index ``times * e_k`` with k counted from 1."""
    a = [0] * dim
    a[k - 1] = times
    return tuple(a)


def pair_index(i, j, dim=NDIM):
    a = [0] * dim
    a[i - 1] += 1
    a[j - 1] += 1
    return tuple(a)


# ---------------------------------------------------------------------------
# coefficients

def coefficient_b(order):
    """Hermite coefficient of the Dirac mass at 0: H_q(0) / (q! sqrt(2 pi))."""
    order = int(order)
    return float(hermite(order, 0.0)) / (factorial(order) * sqrt(2 * pi))


@dataclass(frozen=True)
class AEstimate:
    value: float
    std_error: float
    samples: int


def _a_stream(samples, seed):
    done = 0
    c = 0
    while done < samples:
        m = min(A_CHUNK, samples - done)
        g = np.random.default_rng(mix_seed(seed, c)).standard_normal((m, 6))
        yield g
        done += m
        c += 1


def coefficient_a_many(indices, samples=1_000_000, seed=0):
    """Monte Carlo a-coefficients ``E[|N ^ N'| H_alpha(N, N')] / alpha!`` for 6-indices.

    All indices share one normal stream. Returns a dict index -> AEstimate.
    """
    samples = int(samples)
    if samples < 100_000:
        raise ParameterOutOfRange("samples", samples, ">= 1e5")
    indices = [tuple(int(v) for v in a) for a in indices]
    for a in indices:
        if len(a) != 6 or min(a) < 0:
            raise ParameterOutOfRange("index", a, "6 nonnegative integers")
    s = np.zeros(len(indices))
    ss = np.zeros(len(indices))
    for g in _a_stream(samples, seed):
        v = np.linalg.norm(np.cross(g[:, :3], g[:, 3:]), axis=1)
        for t, a in enumerate(indices):
            y = v * hermite_multi(a, g) / multi_factorial(a)
            s[t] += y.sum()
            ss[t] += (y * y).sum()
    mean = s / samples
    var = np.maximum(ss / samples - mean**2, 0.0) * samples / (samples - 1)
    se = np.sqrt(var / samples)
    return {a: AEstimate(float(mean[t]), float(se[t]), samples) for t, a in enumerate(indices)}


def coefficient_a_mc(index6, samples=1_000_000, seed=0):
    return coefficient_a_many([index6], samples, seed)[tuple(index6)]


# a-values stated analytically: E|N ^ N'| = 2, and a_{2 e_k} = 1/3 follows from
# c_{2e_k} = 1/(6 pi) with b_0^2 = 1/(2 pi); vanishing by reflection symmetry
# for every e_i + e_j with i != j, and for all odd orders.
def stated_a(index6):
    a = tuple(int(v) for v in index6)
    if sum(a) == 0:
        return 2.0
    if sum(a) % 2:
        return 0.0
    if sum(a) == 2:
        return 1.0 / 3.0 if max(a) == 2 else 0.0
    raise KeyError(f"no stated value for a{a}; estimate it with coefficient_a_mc")


def coefficient_c(index8, a=None):
    """c_alpha = b_{alpha_1} b_{alpha_2} a_{(alpha_3..alpha_8)}.

    ``a`` may be a mapping 6-index -> value (or AEstimate); missing entries
    fall back to the analytically stated values.
    """
    idx = tuple(int(v) for v in index8)
    if len(idx) != NDIM:
        raise ParameterOutOfRange("index", idx, "8 nonnegative integers")
    b = coefficient_b(idx[0]) * coefficient_b(idx[1])
    if b == 0.0:
        return 0.0
    tail = idx[2:]
    val = None
    if a is not None and tail in a:
        val = a[tail]
        val = getattr(val, "value", val)
    if val is None:
        val = stated_a(tail)
    return b * float(val)


@dataclass
class ChaosCoefficients:
    b: dict
    a: dict
    c: dict

    @classmethod
    def second_order(cls, samples=4_000_000, seed=0):
        """b up to order 2, all a with |alpha| <= 2, and c for every |alpha| = 2 index."""
        idx6 = [(0,) * 6]
        for i, j in combinations_with_replacement(range(1, 7), 2):
            idx6.append(pair_index(i, j, 6))
        a = coefficient_a_many(idx6, samples, seed)
        c = {}
        for i, j in combinations_with_replacement(range(1, NDIM + 1), 2):
            k = pair_index(i, j)
            c[k] = coefficient_c(k, a)
        return cls(b={q: coefficient_b(q) for q in range(5)}, a=a, c=c)


# ---------------------------------------------------------------------------
# Mehler expectations

def _tables(rows, cols):
    """All nonnegative integer matrices with the given row and column sums."""
    rows = list(rows)
    cols = list(cols)
    nr, nc = len(rows), len(cols)
    cur = np.zeros((nr, nc), dtype=np.int64)

    def fill_row(i, j, left, colrem):
        if i == nr:
            if all(c == 0 for c in colrem):
                yield cur.copy()
            return
        if j == nc - 1:
            if left <= colrem[j]:
                cur[i, j] = left
                colrem[j] -= left
                yield from fill_row(i + 1, 0, rows[i + 1] if i + 1 < nr else 0, colrem)
                colrem[j] += left
                cur[i, j] = 0
            return
        for v in range(min(left, colrem[j]), -1, -1):
            cur[i, j] = v
            colrem[j] -= v
            yield from fill_row(i, j + 1, left - v, colrem)
            colrem[j] += v
        cur[i, j] = 0

    if sum(rows) != sum(cols):
        return
    if nr == 0:
        yield cur.copy()
        return
    yield from fill_row(0, 0, rows[0], cols[:])


def _cross_block(sigma, dim):
    s = np.asarray(sigma, dtype=float)
    if s.shape == (dim, dim):
        return s
    if s.shape != (2 * dim, 2 * dim):
        raise ParameterOutOfRange("sigma", s.shape, f"({dim},{dim}) cross block or ({2*dim},{2*dim}) joint")
    eye = np.eye(dim)
    if not (np.allclose(s[:dim, :dim], eye, atol=1e-12) and np.allclose(s[dim:, dim:], eye, atol=1e-12)):
        raise ParameterOutOfRange("sigma", "diagonal blocks", "identity")
    return s[:dim, dim:]


def mehler_expectation(alpha, beta, sigma):
    """E[H_alpha(X) H_beta(Y)] for standard Gaussian vectors X, Y with Cov(X_i, Y_j) = K_ij.

    ``sigma`` is either the cross block K or the joint covariance of (X, Y)
    (whose diagonal blocks must be identities). Exact enumeration over
    matrices d with row sums alpha and column sums beta of
    alpha! beta! prod K_ij^d_ij / d_ij!.
    """
    alpha = tuple(int(v) for v in alpha)
    beta = tuple(int(v) for v in beta)
    if len(alpha) != len(beta):
        raise ParameterOutOfRange("beta", beta, f"length {len(alpha)}")
    if sum(alpha) > MEHLER_MAX_ORDER or sum(beta) > MEHLER_MAX_ORDER:
        raise IndexTooLarge(f"|alpha| = {sum(alpha)} exceeds {MEHLER_MAX_ORDER}")
    if sum(alpha) != sum(beta):
        return 0.0
    k = _cross_block(sigma, len(alpha))
    ri = [i for i, a in enumerate(alpha) if a]
    ci = [j for j, b in enumerate(beta) if b]
    sub = k[np.ix_(ri, ci)] if ri else np.zeros((0, 0))
    total = 0.0
    for d in _tables([alpha[i] for i in ri], [beta[j] for j in ci]):
        term = 1.0
        for (i, j), v in np.ndenumerate(d):
            if v:
                term *= sub[i, j] ** v / factorial(int(v))
        total += term
    return float(multi_factorial(alpha) * multi_factorial(beta) * total)


# ---------------------------------------------------------------------------
# covariance of the normalized vector

def ybar_cross_covariance(spectrum, x):
    """8x8 block ``K_ij = Cov(Ybar_i(0), Ybar_j(x))`` for an isotropic spectrum.

    Cov(xi(0), xi(x)) = r, Cov(xi(0), d_j xi(x)) = r_j, Cov(d_i xi(0), xi(x)) = -r_i,
    Cov(d_i xi(0), d_j xi(x)) = -r_ij; xi and eta blocks are independent.
    """
    prof = profile_for(spectrum)
    lam = prof.lam
    r, g, hmat = prof.cartesian(np.asarray(x, dtype=float))
    r = float(r)
    s = sqrt(lam)
    blk = np.zeros((4, 4))
    blk[0, 0] = r
    blk[0, 1:] = g / s
    blk[1:, 0] = -g / s
    blk[1:, 1:] = -hmat / lam
    k = np.zeros((NDIM, NDIM))
    # slots: 0 xi, 1 eta, 2..4 grad xi, 5..7 grad eta
    xi_slots = [0, 2, 3, 4]
    eta_slots = [1, 5, 6, 7]
    k[np.ix_(xi_slots, xi_slots)] = blk
    k[np.ix_(eta_slots, eta_slots)] = blk
    return k


SECOND_ORDER_C = None


def second_chaos_density(spectrum, x, c=None):
    """pi^0 sum over |alpha|=|beta|=2 of c_alpha c_beta E[H_alpha(Ybar(0)) H_beta(Ybar(x))].

    Equals Dr(x) / pi^2 when the c-coefficients take their exact values.
    """
    k = ybar_cross_covariance(spectrum, x)
    if c is None:
        c = {pair_index(i, j): coefficient_c(pair_index(i, j))
             for i, j in combinations_with_replacement(range(1, NDIM + 1), 2)}
    items = [(a, v) for a, v in c.items() if v != 0.0]
    total = 0.0
    for a, ca in items:
        for b, cb in items:
            total += ca * cb * mehler_expectation(a, b, k)
    return total


# ---------------------------------------------------------------------------
# variance of the second chaos

def _isotropic(spectrum):
    if isinstance(spectrum, AnisotropicSpectrum):
        raise ParameterOutOfRange("spectrum", "anisotropic", "isotropic spectrum")
    return spectrum


def _radial_scale(spectrum):
    """Length over which the covariance profile varies (for panel widths)."""
    lo, hi = spectrum.support
    return pi / (2.0 * max(hi, 1e-12)) if spectrum.model != "power_law" else pi / 2.0


def var_I2_per_volume(spectrum, n, rtol=1e-10):
    """Var(I2(Q_n)) / vol(Q_n) = (4/pi) int_0^{2 sqrt3 n} C_1(rho/n) Dr(rho) rho^2 d rho."""
    s = _isotropic(spectrum)
    n = float(n)
    if not n > 0:
        raise ParameterOutOfRange("n", n, "(0, inf)")
    prof = profile_for(s)
    cov = unit_covariogram()
    top = CUBE_KINKS[-1] * n
    kinks = [k * n for k in CUBE_KINKS[:-1]]

    def f(rho):
        return cov(rho, n) * prof.dr(rho) * rho * rho

    width = max(_panel_width(s), top / 4096)
    if s.model in ("bargmann_fock", "gamma", "black_body"):
        # integrand is negligible past ~40 correlation lengths
        cut = min(top, 40.0 / sqrt(prof.lam) * (4.0 if s.model != "bargmann_fock" else 1.0))
        tail_pts = [p for p in kinks if p < cut]
        val = integrate(f, 0.0, cut, breakpoints=tail_pts, panel_width=width, rtol=rtol, atol=1e-300)
        if cut < top:
            val += integrate(f, cut, top, breakpoints=[p for p in kinks if p > cut], panel_width=top / 64,
                             rtol=1e-8, atol=1e-16 * max(abs(val), 1e-300))
    else:
        val = integrate(f, 0.0, top, breakpoints=kinks, panel_width=width, rtol=rtol,
                        atol=1e-14 * n**3)
    return 4.0 / pi * val


def _panel_width(s):
    if s.model == "monochromatic":
        return 0.5 / s.kappa
    if s.model == "power_law":
        return 1.0
    return 0.5 / sqrt(second_moment(s).lam)


def var_I2(spectrum, n):
    """Var(I2(Q_n)) for the cube [-n, n]^3."""
    return var_I2_per_volume(spectrum, n) * (2.0 * n) ** 3


def small_box_limit(spectrum, n):
    """Leading small-box value of Var(I2)/vol: vol * Dr(0) / pi^2 = (2n)^3 (4/3) / pi^2."""
    return (2.0 * n) ** 3 * (4.0 / 3.0) / pi**2


def _halfline(f, scale, rtol=1e-12, max_doublings=60):
    """int_0^inf f for a non-oscillatory, decaying integrand.

    Integrates over [0, scale] and then doubling intervals. Once successive
    pieces shrink by a ratio q < 1/2, the remainder is bounded by the
    geometric tail piece * q / (1 - q) and added when it is below 1e-13 of
    the total.
    """
    total = integrate(f, 0.0, scale, panel_width=scale / 8, rtol=rtol)
    a = scale
    prev = None
    for _ in range(max_doublings):
        piece = integrate(f, a, 2 * a, panel_width=a / 8, rtol=rtol, atol=1e-16 * abs(total))
        total += piece
        a *= 2
        if prev is not None and prev != 0.0:
            q = piece / prev
            if 0.0 <= q < 0.5:
                tail = piece * q / (1.0 - q)
                if abs(tail) < 1e-13 * abs(total):
                    return total + tail
        if abs(piece) < 1e-16 * abs(total):
            return total
        prev = piece
    raise QuadratureFailure("half-line integral did not converge")


def _square_integrable(s):
    if s.model == "monochromatic":
        raise DivergentIntegral("monochromatic spectrum has no density; int Dr dx diverges")
    if s.model == "power_law":
        raise DivergentIntegral("power-law spectrum: f(k)/|k|^2 is not square integrable (long-range regime)")


def integral_dr(spectrum):
    """int_{R^3} Dr(x) dx by radial quadrature of the covariance profile."""
    s = _isotropic(spectrum)
    _square_integrable(s)
    prof = profile_for(s)
    scale = 4.0 / sqrt(prof.lam)
    return 4 * pi * _halfline(lambda t: prof.dr(t) * t * t, scale)


def integral_dr_spectral(spectrum, sign=-1.0, fourier_factor=True):
    """Plancherel side ``(2pi)^3 4pi int (1 - rho^2/(3 lam))^2 f(rho)^2 rho^-2 d rho``.

    ``sign=+1, fourier_factor=False`` gives the variant with a plus sign and
    no (2 pi)^3, kept for reporting.
    """
    s = _isotropic(spectrum)
    _square_integrable(s)
    lam = second_moment(s).lam
    lo, hi = s.support

    def f(rho):
        return (1.0 + sign * rho * rho / (3 * lam)) ** 2 * s.density(rho) ** 2 / (rho * rho)

    pts = list(np.linspace(lo, hi, 33)[1:-1])
    val = sp_integrate.quad(f, lo, hi, points=pts, epsabs=0.0, epsrel=1e-13, limit=2000, full_output=True)
    v, err = val[0], val[1]
    if err > 1e-11 * abs(v):
        v2 = integrate(f, lo, hi, breakpoints=pts, rtol=1e-13, atol=1e-300)
        if abs(v2 - v) > 1e-10 * abs(v):
            raise QuadratureFailure("spectral integral did not converge")
        v = v2
    return (2 * pi) ** 3 * 4 * pi * v if fourier_factor else 4 * pi * v


def v2_quadrature(spectrum):
    """Limit of Var(I2(Q))/vol(Q) from the x-space integral: pi^-2 int Dr."""
    return integral_dr(spectrum) / pi**2


def v2_plancherel(spectrum):
    """The same limit from the spectral side of Plancherel's identity."""
    return integral_dr_spectral(spectrum) / pi**2


def v2_plancherel_printed(spectrum):
    """Value of the spectral expression with a plus sign and no (2 pi)^3 (report only)."""
    return integral_dr_spectral(spectrum, sign=1.0, fourier_factor=False) / pi**2


# ---------------------------------------------------------------------------
# monochromatic decay

def mono_f(y):
    """F(y) = (D(y) y^2 + 2 cos 2y - 4 sin(2y)/y) / 6 for the unit monochromatic wave."""
    y = np.asarray(y, dtype=float)
    prof = profile_for(make_model("monochromatic", kappa=1.0))
    small = y < 0.05
    ys = np.where(small, 1.0, y)
    out = (prof.dr(ys) * ys * ys + 2 * np.cos(2 * ys) - 4 * np.sin(2 * ys) / ys) / 6.0
    if np.any(small):
        out = np.where(small, _mono_f_series(y), out)
    return out


@lru_cache(maxsize=1)
def _mono_f_coeffs(terms=12):
    # Taylor coefficients of D(y) y^2 + 2cos2y - 4 sin2y / y by exact series arithmetic
    from fractions import Fraction as Fr

    N = 2 * terms + 6
    # sinc series s(y) = sum (-1)^k y^2k / (2k+1)!
    s = [Fr(0)] * N
    for k in range(0, N // 2):
        s[2 * k] = Fr((-1) ** k, factorial(2 * k + 1))

    def der(p):
        return [Fr(i + 1) * p[i + 1] for i in range(len(p) - 1)] + [Fr(0)]

    def mul(p, q):
        r = [Fr(0)] * N
        for i, a in enumerate(p):
            if a:
                for j in range(N - i):
                    r[i + j] += a * q[j]
        return r

    g1 = der(s)
    g2 = der(g1)
    g1t = [g1[i + 1] for i in range(N - 1)] + [Fr(0)]
    # lam = 1/3: D = g0^2 - 2 g1^2 + 2 (g1/t)^2 + g2^2
    d = [a - 2 * b + 2 * c + e for a, b, c, e in zip(mul(s, s), mul(g1, g1), mul(g1t, g1t), mul(g2, g2))]
    dy2 = [Fr(0), Fr(0)] + d[:N - 2]
    cos2 = [Fr(0)] * N
    sin2y = [Fr(0)] * N
    for k in range(N // 2):
        cos2[2 * k] = Fr((-1) ** k * 2 ** (2 * k), factorial(2 * k))
        if 2 * k < N:
            sin2y[2 * k] = Fr((-1) ** k * 2 ** (2 * k + 1), factorial(2 * k + 1))
    tot = [(a + 2 * b - 4 * c) / 6 for a, b, c in zip(dy2, cos2, sin2y)]
    return np.array([float(tot[2 * k]) for k in range(terms)])


def _mono_f_series(y):
    c = _mono_f_coeffs()
    y2 = np.asarray(y, dtype=float) ** 2
    out = np.zeros_like(y2)
    for v in c[::-1]:
        out = out * y2 + v
    return out


def mono_f_closed(y):
    """Trigonometric form F(y) = cos 2y / y^2 - sin 2y / y^3 + sin^2 y / y^4 (y > 0)."""
    y = np.asarray(y, dtype=float)
    return np.cos(2 * y) / y**2 - np.sin(2 * y) / y**3 + np.sin(y) ** 2 / y**4


def _mono_f_oscillating(y):
    # F minus its non-oscillating part 1/(2 y^4)
    return np.cos(2 * y) / y**2 - np.sin(2 * y) / y**3 - np.cos(2 * y) / (2 * y**4)


def mono_j(head=40.0):
    """J = int_0^inf F(y) dy (target -pi/3).

    Panels up to ``head``; beyond it the 1/(2 y^4) part is integrated
    exactly and the purely oscillating remainder by half-period blocks with
    iterated Aitken acceleration (Wynn epsilon as a cross-check).
    """
    a = float(np.ceil(head / (pi / 2)) * (pi / 2))
    body = integrate(mono_f, 0.0, a, panel_width=0.25, rtol=1e-13, atol=1e-300)
    return body + 1.0 / (6 * a**3) + oscillatory_tail(_mono_f_oscillating, a, pi / 2, blocks=60, tol=1e-13)


def mono_j_qawf(head=40.0):
    """Independent evaluation of J with scipy's QAGS body and QAWF Fourier tails."""
    body = sp_integrate.quad(mono_f, 0.0, head, limit=2000, epsabs=1e-13, epsrel=1e-12)[0]
    c2 = sp_integrate.quad(lambda y: 1 / y**2 - 1 / (2 * y**4), head, np.inf, weight="cos", wvar=2.0)[0]
    s3 = sp_integrate.quad(lambda y: -1 / y**3, head, np.inf, weight="sin", wvar=2.0)[0]
    return body + c2 + s3 + 1.0 / (6 * head**3)


@dataclass
class DecayRow:
    n: float
    t1: float
    t2: float
    t3: float

    @property
    def total(self):
        return self.t1 + self.t2 + self.t3

    @property
    def var_per_volume(self):
        return 4.0 / pi * self.total


def _decay_terms(n, rtol=1e-11):
    cov = unit_covariogram()
    top = CUBE_KINKS[-1] * n
    kinks = [k * n for k in CUBE_KINKS[:-1]]

    def quad(g):
        return integrate(lambda y: cov(y, n) * g(y), 0.0, top, breakpoints=kinks, panel_width=0.5,
                         rtol=rtol, atol=1e-13)

    t1 = -2 * quad(lambda y: np.cos(2 * y))
    t2 = 4 * quad(lambda y: np.sinc(2 * y / pi) * 2.0)
    t3 = 6 * quad(mono_f)
    return DecayRow(float(n), t1, t2, t3)


def monochromatic_decay(ns):
    """Three-term split of (pi/4) Var(I2(Q_n))/vol(Q_n) for the unit monochromatic wave.

    T1 = -2 int C(y/n) cos 2y dy  ->  0 like 1/n
    T2 =  4 int C(y/n) sin(2y)/y dy  ->  2 pi
    T3 =  6 int C(y/n) F(y) dy  ->  6 J = -2 pi
    """
    return [_decay_terms(float(n)) for n in ns]


# ---------------------------------------------------------------------------
# scaling fits

@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    r2: float
    ns: tuple
    variances: tuple
    expected: float = float("nan")


def fit_loglog(x, y):
    lx, ly = np.log(x), np.log(y)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss = ((ly - ly.mean()) ** 2).sum()
    r2 = 1.0 - (resid**2).sum() / ss if ss > 0 else 1.0
    return float(slope), float(r2)


def variance_scaling(spectrum, ns):
    ns = np.asarray(ns, dtype=float)
    v = np.array([var_I2(spectrum, n) for n in ns])
    if np.any(v <= 0):
        raise QuadratureFailure("nonpositive second-chaos variance in scaling fit")
    slope, r2 = fit_loglog((2 * ns) ** 3, v)
    return slope, r2, v


def powerlaw_scaling(beta, ns=(5, 10, 20, 40, 80)):
    """Slope of log Var(I2(Q_n)) against log vol(Q_n) for the power-law model."""
    beta = float(beta)
    if not 0 < beta < 0.25:
        raise ParameterOutOfRange("beta", beta, "(0, 1/4)")
    ns = tuple(float(n) for n in ns)
    if max(ns) / min(ns) < 10:
        raise ParameterOutOfRange("ns", ns, "span of at least one decade")
    slope, r2, v = variance_scaling(make_model("power_law", beta=beta), ns)
    return ScalingFit(slope, r2, ns, tuple(float(x) for x in v), (2 * beta + 4) / 3)


# ---------------------------------------------------------------------------
# empirical second-chaos projection

def grid_weights(dims, h):
    """Trapezoid weights on a uniform 3-D grid."""
    ws = []
    for d in dims:
        w = np.full(d, h)
        w[0] = w[-1] = 0.5 * h
        ws.append(w)
    return ws[0][:, None, None] * ws[1][None, :, None] * ws[2][None, None, :]


def second_chaos_projection(g, lam):
    """lam * sum_k c_{2e_k} int_Q H_2(Ybar_k(x)) dx by trapezoid quadrature on a grid with gradients."""
    if g.grad_xi is None or g.grad_eta is None:
        raise ValueError("grid sample needs gradients (sample_grid(..., with_grad=True))")
    w = grid_weights(g.dims, g.h)
    cv = coefficient_c(unit_index(1, times=2))
    cg = coefficient_c(unit_index(3, times=2))
    val = (g.xi**2 - 1.0) + (g.eta**2 - 1.0)
    grad = ((g.grad_xi**2).sum(-1) + (g.grad_eta**2).sum(-1)) / lam - 6.0
    return lam * float((w * (cv * val + cg * grad)).sum())
