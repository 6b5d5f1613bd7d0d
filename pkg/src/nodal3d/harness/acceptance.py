"""The acceptance suite as plain functions.

Each ``criterion_k`` returns a :class:`CriterionResult`; :func:`validate_all`
runs them in order. Ensembles are drawn through an :class:`EnsembleCache`
so the realizations shared between checks are computed once.
"""

import time
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import factorial, pi, sqrt

import numpy as np

from .. import chaos, kacrice, nodal
from ..spectrum import AnisotropicSpectrum, make_model, second_moment
from .ensemble import EnsembleCache
from .stats import EnsembleStats, bootstrap_variance, clt_diagnostics

REFERENCE_SEED = 20240101
M_DEFAULT = 1024


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{status}] {self.title} ({self.seconds:.1f} s): {self.summary()}"

    def summary(self):
        return self.details.get("summary", "")

    def as_dict(self):
        return {"number": self.number, "title": self.title, "passed": bool(self.passed),
                "seconds": self.seconds, "details": self.details}


def _timed(fn):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


def _cache(cache):
    return EnsembleCache() if cache is None else cache


# -- 1 -------------------------------------------------------------------
@_timed
def criterion_1(cache=None, expected_fn=kacrice.expected_length_isotropic, realizations=200, n=3.0, h=0.1,
                seed=REFERENCE_SEED, rel_tol=0.05, time_limit=600.0):
    """Isotropic expectation lam vol / pi for Bargmann-Fock and monochromatic(1)."""
    cache = _cache(cache)
    vol = (2 * n) ** 3
    out = {}
    ok = True
    for name, s in (("bargmann_fock", make_model("bargmann_fock")), ("monochromatic", make_model("monochromatic", kappa=1.0))):
        t0 = time.perf_counter()
        lengths, _ = cache.lengths(s, M_DEFAULT, n, h, seed, realizations)
        dt = time.perf_counter() - t0
        st = EnsembleStats.from_samples(lengths, keep=False)
        lam = second_moment(s).lam
        expected = expected_fn(lam, vol)
        rel = st.mean / expected - 1.0
        good = abs(rel) <= rel_tol and dt <= time_limit
        ok &= good
        out[name] = {"mean": st.mean, "std_error": st.std_error_of_mean, "mean_per_volume": st.mean / vol,
                     "expected": expected, "expected_per_volume": expected / vol, "relative_error": rel,
                     "seconds": dt, "passed": good}
    out["summary"] = ", ".join(f"{k} rel.err {v['relative_error']:+.4f}" for k, v in out.items())
    return CriterionResult(1, "isotropic expectation", ok, out)


# -- 2 -------------------------------------------------------------------
@_timed
def criterion_2(samples=1_000_000, seed=REFERENCE_SEED, tol=0.01):
    """E|N ^ N'| = 2 by plain Monte Carlo."""
    est = kacrice.cross_product_moment((1.0, 1.0, 1.0), samples, seed)
    ok = abs(est.value - 2.0) <= tol
    d = {"value": est.value, "std_error": est.std_error, "samples": est.samples,
         "summary": f"{est.value:.5f} +- {est.std_error:.5f}"}
    return CriterionResult(2, "vorticity moment", ok, d)


# -- 3 -------------------------------------------------------------------
@_timed
def criterion_3(cache=None, realizations=200, n=3.0, h=0.1, seed=REFERENCE_SEED + 3, mc_seed=REFERENCE_SEED + 4,
                samples=1_000_000, z_max=3.0, time_limit=900.0):
    """Ensemble mean under the transform diag(1,1,2) against the anisotropic formula."""
    cache = _cache(cache)
    base = make_model("bargmann_fock")
    s = AnisotropicSpectrum(base, np.diag([1.0, 1.0, 2.0]))
    vol = (2 * n) ** 3
    t0 = time.perf_counter()
    lengths, _ = cache.lengths(s, M_DEFAULT, n, h, seed, realizations)
    dt = time.perf_counter() - t0
    st = EnsembleStats.from_samples(lengths, keep=False)
    eigs = second_moment(s).eigenvalues
    est = kacrice.expected_length_anisotropic(eigs, vol, samples, mc_seed)
    se = sqrt(st.std_error_of_mean**2 + est.std_error**2)
    z = (st.mean - est.value) / se
    ok = abs(z) <= z_max and dt <= time_limit
    d = {"eigenvalues": list(eigs), "ensemble_mean": st.mean, "ensemble_std_error": st.std_error_of_mean,
         "expected": est.value, "expected_std_error": est.std_error,
         "expected_quadrature": kacrice.expected_length_anisotropic_exact(eigs, vol), "z": z, "seconds": dt,
         "summary": f"mean {st.mean:.3f} vs {est.value:.3f}, z = {z:+.2f}"}
    return CriterionResult(3, "anisotropic expectation", ok, d)


# -- 4 -------------------------------------------------------------------
@_timed
def criterion_4(rel_tol=1e-6):
    """int Dr dx in x-space against the spectral side of Plancherel's identity."""
    d = {}
    ok = True
    for name, s in (("bargmann_fock", make_model("bargmann_fock")), ("gamma_2_1", make_model("gamma", p=2, beta=1.0))):
        a = chaos.integral_dr(s)
        b = chaos.integral_dr_spectral(s)
        rel = abs(a - b) / abs(b)
        ok &= rel <= rel_tol
        d[name] = {"x_space": a, "spectral": b, "relative_difference": rel,
                   "v2": b / pi**2, "v2_printed_variant": chaos.v2_plancherel_printed(s)}
    d["summary"] = ", ".join(f"{k} {v['relative_difference']:.1e}" for k, v in d.items())
    return CriterionResult(4, "Plancherel identity", ok, d)


# -- 5 -------------------------------------------------------------------
@_timed
def criterion_5(samples=4_000_000, seed=REFERENCE_SEED + 5, rel_tol=0.02, z_max=4.0, time_limit=120.0):
    """MC chaos coefficients: c_{2e_k} targets and vanishing mixed a-coefficients."""
    cc = chaos.ChaosCoefficients.second_order(samples, seed)
    targets = {k: (-1 / (2 * pi) if k <= 2 else 1 / (6 * pi)) for k in range(1, 9)}
    cvals = {}
    ok = True
    for k, tgt in targets.items():
        v = cc.c[chaos.unit_index(k, times=2)]
        rel = v / tgt - 1.0
        ok &= abs(rel) <= rel_tol
        cvals[f"c_2e{k}"] = {"value": v, "target": tgt, "relative_error": rel}
    mixed = {}
    for i, j in combinations_with_replacement(range(1, 7), 2):
        if i == j:
            continue
        e = cc.a[chaos.pair_index(i, j, 6)]
        z = e.value / e.std_error
        ok &= abs(z) <= z_max
        mixed[f"a_e{i}+e{j}"] = {"value": e.value, "std_error": e.std_error, "z": z}
    # index pairs counted with order: 24 with |j - i| != 3, 6 on the paired slots
    worst_c = max(abs(v["relative_error"]) for v in cvals.values())
    worst_z = max(abs(v["z"]) for v in mixed.values())
    a0 = cc.a[(0,) * 6]
    d = {"a0": {"value": a0.value, "std_error": a0.std_error}, "c": cvals, "mixed_a": mixed,
         "b": {str(q): v for q, v in cc.b.items()},
         "summary": f"max |c rel.err| {worst_c:.4f}, max |z| mixed a {worst_z:.2f} over {len(mixed)} pairs"}
    return CriterionResult(5, "chaos coefficients", ok, d)


# -- 6 -------------------------------------------------------------------
@_timed
def criterion_6(ratio_max=0.2, j_tol=1e-8, t2_tol=0.02):
    """Monochromatic second-chaos decay, J = -pi/3 and T2(50) -> 2 pi."""
    mono = make_model("monochromatic", kappa=1.0)
    v5 = chaos.var_I2_per_volume(mono, 5.0)
    v40 = chaos.var_I2_per_volume(mono, 40.0)
    j = chaos.mono_j()
    row = chaos.monochromatic_decay([50.0])[0]
    ratio = v40 / v5
    t2_rel = row.t2 / (2 * pi) - 1.0
    ok = ratio <= ratio_max and abs(j + pi / 3) <= j_tol and abs(t2_rel) <= t2_tol
    d = {"var_per_volume_n5": v5, "var_per_volume_n40": v40, "ratio": ratio, "J": j,
         "J_error": j + pi / 3, "T1_50": row.t1, "T2_50": row.t2, "T3_50": row.t3, "T2_relative_error": t2_rel,
         "summary": f"ratio {ratio:.4f}, J err {j + pi / 3:.1e}, T2 rel.err {t2_rel:+.4f}"}
    return CriterionResult(6, "monochromatic decay", ok, d)


# -- 7 -------------------------------------------------------------------
@_timed
def criterion_7(ns=(5, 10, 20, 40, 80), tol=0.05):
    """Variance-scaling exponents for the power law and the Bargmann-Fock control."""
    d = {}
    ok = True
    for beta in (0.1, 0.2):
        f = chaos.powerlaw_scaling(beta, ns)
        good = abs(f.exponent - f.expected) <= tol
        ok &= good
        d[f"power_law_{beta}"] = {"exponent": f.exponent, "expected": f.expected, "r2": f.r2,
                                  "variances": list(f.variances)}
    slope, r2, v = chaos.variance_scaling(make_model("bargmann_fock"), ns)
    ok &= abs(slope - 1.0) <= tol
    d["bargmann_fock"] = {"exponent": slope, "expected": 1.0, "r2": r2, "variances": v.tolist()}
    d["ns"] = list(ns)
    d["summary"] = ", ".join(f"{k} {v['exponent']:.4f} (target {v['expected']:.4f})"
                             for k, v in d.items() if isinstance(v, dict))
    return CriterionResult(7, "power-law scaling", ok, d)


# -- 8 -------------------------------------------------------------------
def calibration_fixtures(count=1000, seed=REFERENCE_SEED + 8):
    rng = np.random.default_rng(seed)
    g = clt_diagnostics(EnsembleStats.from_samples(rng.standard_normal(count), keep=False))
    c = clt_diagnostics(EnsembleStats.from_samples(rng.chisquare(1, count), keep=False))
    return g, c


@_timed
def criterion_8(cache=None, realizations=500, floor_realizations=200, ns=(2.0, 3.0, 4.0), h=0.1,
                seed=REFERENCE_SEED, bootstrap=2000):
    """Normality gates at n = 3 and the second-chaos variance floor."""
    cache = _cache(cache)
    s = make_model("bargmann_fock")
    lam = second_moment(s).lam
    lengths, _ = cache.lengths(s, M_DEFAULT, 3.0, h, seed, realizations)
    st = EnsembleStats.from_samples(lengths, keep=False)
    clt = clt_diagnostics(st, vol=216.0)
    gauss, chi2 = calibration_fixtures()
    calib_ok = gauss.passed and (not chi2.passed) and chi2.z_skew > 3.0
    floors = {}
    floor_ok = True
    for n in ns:
        count = realizations if n == 3.0 else floor_realizations
        ln, _ = cache.lengths(s, M_DEFAULT, n, h, seed, count)
        vol = (2 * n) ** 3
        v = float(np.var(ln, ddof=1)) / vol
        se, ci = bootstrap_variance(ln, bootstrap, seed=int(n * 1000))
        se /= vol
        floor = lam**2 * chaos.var_I2_per_volume(s, n)
        good = v >= floor - 3 * se
        floor_ok &= good
        floors[str(n)] = {"count": count, "var_per_volume": v, "bootstrap_se": se,
                          "ci": [ci[0] / vol, ci[1] / vol], "floor": floor, "ratio": v / floor, "passed": good}
    ok = clt.passed and calib_ok and floor_ok
    d = {"clt": clt.as_dict(), "calibration_gaussian": gauss.as_dict(), "calibration_chi2": chi2.as_dict(),
         "variance_floor": floors,
         "summary": f"z_skew {clt.z_skew:+.2f}, z_kurt {clt.z_kurt:+.2f}, calibration {'ok' if calib_ok else 'bad'}, "
                    + ", ".join(f"n={k}: Var/vol {v['var_per_volume']:.4f} >= {v['floor']:.4f}" for k, v in floors.items())}
    return CriterionResult(8, "CLT diagnostics", ok, d)


# -- 9 -------------------------------------------------------------------
@_timed
def criterion_9(h_fine=0.02, hs=(0.1, 0.05, 0.025), rel_tol=0.01):
    """Analytic nodal-length oracles."""
    from ..synthesis import analytic_grid

    d = {}
    ax = nodal.axis_field()
    la = nodal.extract_nodal_length(analytic_grid(ax.fn, ax.n, 0.25)).total_length
    ok = abs(la - 2.0) <= 1e-12
    d["axis"] = {"length": la, "exact": 2.0}
    for tf in (nodal.circle_field(), nodal.helix_field()):
        ln = nodal.extract_nodal_length(analytic_grid(tf.fn, tf.n, h_fine)).total_length
        rel = ln / tf.exact_length - 1.0
        ok &= abs(rel) <= rel_tol
        d[tf.name] = {"length": ln, "exact": tf.exact_length, "relative_error": rel, "h": h_fine}
    tab = nodal.length_convergence_study("circle", hs)
    mono = bool(np.all(np.diff(tab.error) < 0))
    ok &= mono
    d["refinement"] = {"h": tab.h.tolist(), "error": tab.error.tolist(), "order": tab.order, "decreasing": mono}
    d["summary"] = (f"axis {la:.15f}, circle {d['circle']['relative_error']:+.2e}, helix "
                    f"{d['helix']['relative_error']:+.2e}, order {tab.order:.2f}")
    return CriterionResult(9, "nodal extractor oracles", ok, d)


# -- 10 ------------------------------------------------------------------
def _random_cross_block(rng, dim=8, norm=0.8):
    k = rng.standard_normal((dim, dim))
    return k * (norm / np.linalg.norm(k, 2))


def _random_index(rng, order, dim=8):
    a = np.zeros(dim, dtype=int)
    for i in rng.integers(0, dim, size=order):
        a[i] += 1
    return tuple(int(v) for v in a)


def correlated_pairs(k, size, rng):
    """Draws of (X, Y) standard normal with Cov(X_i, Y_j) = K_ij."""
    dim = k.shape[0]
    rest = np.eye(dim) - k.T @ k
    w, v = np.linalg.eigh(0.5 * (rest + rest.T))
    root = v * np.sqrt(np.maximum(w, 0.0))
    x = rng.standard_normal((size, dim))
    y = x @ k + rng.standard_normal((size, dim)) @ root.T
    return x, y


@_timed
def criterion_10(cases=20, samples=1_000_000, seed=REFERENCE_SEED + 10, z_max=4.0, rhos=(-0.7, -0.3, 0.0, 0.3, 0.55, 0.9)):
    """Mehler enumeration against the one-dimensional closed form and Monte Carlo."""
    worst = 0.0
    for rho in rhos:
        for p in range(5):
            for q in range(5):
                a = chaos.unit_index(1, times=p) if p else (0,) * 8
                b = chaos.unit_index(1, times=q) if q else (0,) * 8
                k = np.zeros((8, 8))
                k[0, 0] = rho
                got = chaos.mehler_expectation(a, b, k)
                want = float(p == q) * factorial(p) * rho**p
                worst = max(worst, abs(got - want))
    closed_ok = worst <= 1e-12
    rng = np.random.default_rng(seed)
    zs = []
    for _ in range(cases):
        k = _random_cross_block(rng)
        a = _random_index(rng, 4)
        b = _random_index(rng, 4)
        exact = chaos.mehler_expectation(a, b, k)
        acc = 0.0
        acc2 = 0.0
        left = samples
        while left:
            m = min(left, 1 << 17)
            x, y = correlated_pairs(k, m, rng)
            v = chaos.hermite_multi(a, x) * chaos.hermite_multi(b, y)
            acc += v.sum()
            acc2 += (v * v).sum()
            left -= m
        mean = acc / samples
        se = sqrt(max(acc2 / samples - mean * mean, 0.0) / samples)
        zs.append((mean - exact) / se)
    zs = np.array(zs)
    ok = closed_ok and bool(np.all(np.abs(zs) <= z_max))
    d = {"closed_form_max_abs_error": worst, "mc_z": zs.tolist(), "cases": cases, "samples": samples,
         "summary": f"closed-form max err {worst:.1e}, MC max |z| {np.abs(zs).max():.2f}"}
    return CriterionResult(10, "Mehler engine", ok, d)


# -- 11 ------------------------------------------------------------------
@_timed
def criterion_11(rel_tol=4e-4, samples=1_000_000, fd_samples=10_000_000, seed=REFERENCE_SEED + 11):
    """First-order perturbation audit at eigenvalues (1.02, 1, 0.98)."""
    rep = kacrice.perturbation_check((1.02, 1.0, 0.98), lam=1.0, vol=8.0, samples=samples, seed=seed,
                                     fd_samples=fd_samples)
    fields_ok = all(np.isfinite(v) for v in (rep.paper_value, rep.oracle_value, *rep.fd_partials))
    ok = fields_ok and abs(rep.oracle_relative_deviation) <= rel_tol
    d = rep.as_dict()
    d["summary"] = (f"oracle rel.dev {rep.oracle_relative_deviation:+.2e}, printed value {rep.paper_value:.6f}, "
                    f"oracle {rep.oracle_value:.6f}, partials " + ", ".join(f"{v:.4f}" for v in rep.fd_partials)
                    + f" (printed coefficient {rep.printed_partial:+.4f})")
    return CriterionResult(11, "perturbation audit", ok, d)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11)
_NEEDS_CACHE = {1, 3, 8}


def validate_all(cache=None, only=None, log=None):
    """Run the criteria (all by default); returns {"passed": bool, "criteria": [...]}."""
    cache = _cache(cache)
    results = []
    for i, fn in enumerate(CRITERIA, 1):
        if only is not None and i not in only:
            continue
        res = fn(cache=cache) if i in _NEEDS_CACHE else fn()
        results.append(res)
        if log is not None:
            log(res.line())
    return {"passed": all(r.passed for r in results), "criteria": [r.as_dict() for r in results]}
