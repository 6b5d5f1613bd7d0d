"""Ensemble statistics and normality diagnostics."""

from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy import stats as sps

from ..errors import ParameterOutOfRange


@dataclass(frozen=True)
class EnsembleStats:
    mean: float
    variance: float
    std_error_of_mean: float
    skewness: float
    excess_kurtosis: float
    count: int
    lengths: np.ndarray = None

    @property
    def variance_defined(self):
        return self.count >= 2

    @classmethod
    def from_samples(cls, x, keep=True):
        x = np.asarray(x, dtype=float).ravel()
        n = x.size
        if n == 0:
            raise ParameterOutOfRange("count", 0, ">= 1")
        mean = float(x.mean())
        if n < 2:
            return cls(mean, float("nan"), float("nan"), float("nan"), float("nan"), n, x if keep else None)
        var = float(x.var(ddof=1))
        skew = float(sps.skew(x, bias=False)) if n > 2 and var > 0 else float("nan")
        kurt = float(sps.kurtosis(x, fisher=True, bias=False)) if n > 3 and var > 0 else float("nan")
        return cls(mean, var, sqrt(var / n), skew, kurt, n, x if keep else None)

    def as_dict(self):
        d = {"mean": self.mean, "variance": self.variance if self.variance_defined else None,
             "variance_defined": self.variance_defined, "std_error_of_mean": self.std_error_of_mean,
             "skewness": self.skewness, "excess_kurtosis": self.excess_kurtosis, "count": self.count}
        if self.lengths is not None:
            d["lengths"] = self.lengths.tolist()
        return d


@dataclass(frozen=True)
class CLTReport:
    z_skew: float
    z_kurt: float
    passed: bool
    var_per_volume: float
    count: int

    def as_dict(self):
        return dict(self.__dict__)


Z_GATE = 3.0


def clt_diagnostics(stats, vol=1.0):
    """Skewness and kurtosis z-scores, sqrt(count/6) skew and sqrt(count/24) exkurt."""
    if stats.count < 100:
        raise ParameterOutOfRange("count", stats.count, ">= 100")
    zs = sqrt(stats.count / 6.0) * stats.skewness
    zk = sqrt(stats.count / 24.0) * stats.excess_kurtosis
    ok = bool(abs(zs) < Z_GATE and abs(zk) < Z_GATE)
    return CLTReport(float(zs), float(zk), ok, stats.variance / vol, stats.count)


def variance_standard_error(x):
    """Delta-method standard error of the sample variance, sqrt((m4 - s^4) / N)."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    m4 = float((d**4).mean())
    s2 = float(x.var(ddof=1))
    return sqrt(max(m4 - s2 * s2, 0.0) / x.size)


def bootstrap_variance(x, replicates=2000, seed=0, level=0.95):
    """Bootstrap standard error and percentile interval of the sample variance."""
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(replicates, x.size))
    v = x[idx].var(axis=1, ddof=1)
    lo, hi = np.quantile(v, [(1 - level) / 2, (1 + level) / 2])
    return float(v.std(ddof=1)), (float(lo), float(hi))


def covariance_with_error(x, y):
    """Sample covariance and its standard error (from the products' spread)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    p = (x - x.mean()) * (y - y.mean())
    cov = float(p.sum() / (n - 1))
    return cov, float(p.std(ddof=1) / sqrt(n))
