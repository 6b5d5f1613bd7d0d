"""Named experiments: each returns a JSON-ready report and optionally writes it."""

import time
from math import pi, sqrt
from pathlib import Path

import numpy as np

from .. import chaos, kacrice
from ..spectrum import AnisotropicSpectrum, second_moment
from . import acceptance
from .config import ExperimentConfig
from .ensemble import EnsembleCache, run_ensemble, run_lengths
from .report import write_csv, write_json
from .stats import EnsembleStats, bootstrap_variance, clt_diagnostics


def _report(cfg, results, passed, tables=None):
    return {"experiment": cfg.experiment, "config": cfg.echo(), "passed": bool(passed),
            "results": results, "_tables": tables or {}}


def expectation(cfg):
    s = cfg.spectrum()
    if isinstance(s, AnisotropicSpectrum):
        return anisotropic_expectation(cfg)
    lam = second_moment(s).lam
    rows = []
    res = {}
    ok = True
    for n in cfg.n:
        t0 = time.perf_counter()
        er = run_ensemble(cfg, n=n)
        vol = er.volume
        exp = kacrice.expected_length_isotropic(lam, vol)
        rel = er.stats.mean / exp - 1.0
        good = abs(rel) <= 0.05
        ok &= good
        res[str(n)] = {"stats": er.stats.as_dict(), "volume": vol, "expected": exp, "relative_error": rel,
                       "mean_per_volume": er.stats.mean / vol, "expected_per_volume": lam / pi,
                       "seconds": time.perf_counter() - t0, "passed": good}
        rows.append([n, er.stats.mean, er.stats.std_error_of_mean, exp, rel])
    return _report(cfg, {"expectation.isotropic": res}, ok,
                   {"expectation": (["n", "mean", "std_error", "expected", "relative_error"], rows)})


def anisotropic_expectation(cfg):
    if cfg.transform is None:
        cfg = cfg.replace(transform=(1.0, 1.0, 2.0))
    s = cfg.spectrum()
    eigs = second_moment(s).eigenvalues
    res = {}
    ok = True
    rows = []
    for n in cfg.n:
        er = run_ensemble(cfg, n=n)
        vol = er.volume
        est = kacrice.expected_length_anisotropic(eigs, vol, cfg.samples, cfg.master_seed + 1)
        se = sqrt(er.stats.std_error_of_mean**2 + est.std_error**2)
        z = (er.stats.mean - est.value) / se
        good = abs(z) <= 3.0
        ok &= good
        res[str(n)] = {"stats": er.stats.as_dict(), "eigenvalues": list(eigs), "expected": est.value,
                       "expected_std_error": est.std_error,
                       "expected_quadrature": kacrice.expected_length_anisotropic_exact(eigs, vol),
                       "z": z, "passed": good}
        rows.append([n, er.stats.mean, er.stats.std_error_of_mean, est.value, est.std_error, z])
    lam = float(np.mean(eigs))
    audit = None
    if max(abs(e - lam) for e in eigs) <= 0.1 * lam:
        audit = kacrice.perturbation_check(eigs, lam=lam, vol=1.0, samples=cfg.samples, seed=cfg.master_seed,
                                           fd_samples=cfg.samples).as_dict()
    return _report(cfg, {"expectation.anisotropic": res, "expectation.perturbation_audit": audit}, ok,
                   {"anisotropic": (["n", "mean", "std_error", "expected", "expected_std_error", "z"], rows)})


def perturbation_audit(eigs, lam=None, samples=1_000_000, fd_samples=10_000_000, seed=0):
    return kacrice.perturbation_check(eigs, lam=lam, vol=1.0, samples=samples, seed=seed,
                                      fd_samples=fd_samples).as_dict()


def variance_scan(cfg):
    s = cfg.spectrum()
    lam = second_moment(s).lam
    res = {}
    rows = []
    ok = True
    for n in cfg.n:
        lengths, _ = run_lengths(s, cfg.M, n, cfg.h, cfg.master_seed, range(cfg.realizations), cfg.threads)
        vol = (2 * n) ** 3
        v = float(np.var(lengths, ddof=1)) / vol
        se, ci = bootstrap_variance(lengths, seed=cfg.master_seed)
        floor = lam**2 * chaos.var_I2_per_volume(s, n)
        good = v >= floor - 3 * se / vol
        ok &= good
        res[str(n)] = {"var_per_volume": v, "bootstrap_se": se / vol, "ci": [ci[0] / vol, ci[1] / vol],
                       "second_chaos_floor": floor, "ratio": v / floor if floor > 0 else None, "passed": good}
        rows.append([n, v, se / vol, ci[0] / vol, ci[1] / vol, floor, v / floor if floor > 0 else float("nan")])
    vals = [res[str(n)]["var_per_volume"] for n in cfg.n]
    succ = [b / a for a, b in zip(vals[:-1], vals[1:])]
    trend = {"successive_ratios": succ, "bounded": bool(all(0.5 <= r <= 2.0 for r in succ)),
             "monotone_increasing": bool(all(r >= 1 for r in succ))}
    quad = {str(n): chaos.var_I2_per_volume(s, n) for n in cfg.n}
    return _report(cfg, {"variance.scan": res, "variance.trend": trend, "variance.quadrature": quad}, ok,
                   {"variance_scan": (["n", "var_per_volume", "bootstrap_se", "ci_lo", "ci_hi", "floor", "ratio"],
                                      rows)})


def clt_check(cfg):
    er = run_ensemble(cfg)
    rep = clt_diagnostics(er.stats, er.volume)
    gauss, chi2 = acceptance.calibration_fixtures()
    ok = rep.passed and gauss.passed and not chi2.passed
    return _report(cfg, {"clt": rep.as_dict(), "stats": er.stats.as_dict(),
                         "calibration_gaussian": gauss.as_dict(), "calibration_chi2": chi2.as_dict()}, ok)


def chaos_coeffs(cfg):
    res = acceptance.criterion_5(samples=max(cfg.samples, 100_000), seed=cfg.master_seed)
    return _report(cfg, {"chaos.coefficients": res.details}, res.passed)


def mono_decay(cfg):
    ns = cfg.n if len(cfg.n) >= 2 else (5.0, 10.0, 20.0, 40.0, 50.0)
    rows = chaos.monochromatic_decay(ns)
    table = [{"n": r.n, "T1": r.t1, "T2": r.t2, "T3": r.t3, "total": r.total, "var_per_volume": r.var_per_volume}
             for r in rows]
    j = chaos.mono_j()
    t1 = np.array([abs(r.t1) for r in rows])
    nn = np.array([r.n for r in rows])
    k_fit = float(np.max(t1 * nn))
    ok = abs(j + pi / 3) <= 1e-8 and rows[-1].var_per_volume <= rows[0].var_per_volume
    return _report(cfg, {"variance.monochromatic_decay": {"table": table, "J": j, "J_error": j + pi / 3,
                                                         "T1_bound_K": k_fit, "n_used": list(ns)}}, ok,
                   {"mono_decay": (["n", "T1", "T2", "T3", "total", "var_per_volume"],
                                   [[r.n, r.t1, r.t2, r.t3, r.total, r.var_per_volume] for r in rows])})


def powerlaw_scaling(cfg):
    ns = cfg.n if len(cfg.n) >= 2 else (5.0, 10.0, 20.0, 40.0, 80.0)
    betas = (cfg.beta,) if (cfg.beta is not None and cfg.model.replace("-", "_") in ("power_law", "powerlaw")) \
        else (0.1, 0.2)
    res = {}
    ok = True
    rows = []
    for b in betas:
        f = chaos.powerlaw_scaling(b, ns)
        good = abs(f.exponent - f.expected) <= 0.05
        ok &= good
        res[str(b)] = {"exponent": f.exponent, "expected": f.expected, "r2": f.r2, "variances": list(f.variances),
                       "passed": good}
        rows.append([b, f.exponent, f.expected, f.r2])
    pl = None
    try:
        s = cfg.spectrum()
        if not isinstance(s, AnisotropicSpectrum):
            pl = {"v2_plancherel": chaos.v2_plancherel(s), "v2_quadrature": chaos.v2_quadrature(s)}
    except Exception as exc:  # divergent or not square integrable: reported, not fatal
        pl = {"error": type(exc).__name__, "message": str(exc)}
    return _report(cfg, {"variance.scaling": res, "variance.plancherel": pl, "n_used": list(ns)}, ok,
                   {"scaling": (["beta", "exponent", "expected", "r2"], rows)})


def validate_all(cfg, log=None):
    rep = acceptance.validate_all(EnsembleCache(cfg.threads), log=log)
    return _report(cfg, rep, rep["passed"])


EXPERIMENT_FUNCS = {
    "expectation": expectation,
    "anisotropic_expectation": anisotropic_expectation,
    "variance_scan": variance_scan,
    "clt_check": clt_check,
    "chaos_coeffs": chaos_coeffs,
    "mono_decay": mono_decay,
    "powerlaw_scaling": powerlaw_scaling,
    "validate_all": validate_all,
}


def run_experiment(cfg, out_dir=None, log=None):
    """Run ``cfg.experiment``; write ``<experiment>.json`` (and CSV tables) into ``out_dir``."""
    if not isinstance(cfg, ExperimentConfig):
        raise TypeError("cfg must be an ExperimentConfig")
    out_dir = out_dir if out_dir is not None else cfg.out_dir
    if out_dir is not None and not Path(out_dir).is_dir():
        raise FileNotFoundError(f"output directory {out_dir} does not exist")
    fn = EXPERIMENT_FUNCS[cfg.experiment]
    t0 = time.perf_counter()
    rep = fn(cfg, log=log) if cfg.experiment == "validate_all" else fn(cfg)
    rep["seconds"] = time.perf_counter() - t0
    tables = rep.pop("_tables")
    if out_dir is not None:
        base = Path(out_dir)
        write_json(base / f"{cfg.experiment}.json", rep)
        if cfg.csv:
            for name, (cols, rows) in tables.items():
                write_csv(base / f"{name}.csv", cols, rows)
    return rep
