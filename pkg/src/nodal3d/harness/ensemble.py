"""Monte Carlo ensembles of nodal lengths."""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..chaos import second_chaos_projection
from ..nodal import extract_nodal_length
from ..spectrum import second_moment
from ..synthesis import ensemble_realization, sample_grid
from .stats import EnsembleStats


def resolve_threads(threads=None):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("NODAL3D_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def realization_length(spectrum, M, n, h, master_seed, index, projection_h=None):
    """Nodal length (and optionally the second-chaos projection) of one ensemble member."""
    fr = ensemble_realization(spectrum, M, master_seed, index)
    length = extract_nodal_length(sample_grid(fr, n, h)).total_length
    proj = float("nan")
    if projection_h is not None:
        g = sample_grid(fr, n, projection_h, with_grad=True)
        proj = second_chaos_projection(g, second_moment(spectrum).lam)
    return length, proj


@dataclass
class EnsembleResult:
    stats: EnsembleStats
    lengths: np.ndarray
    projections: np.ndarray
    n: float
    h: float

    @property
    def volume(self):
        return (2.0 * self.n) ** 3


def run_lengths(spectrum, M, n, h, master_seed, indices, threads=None, projection_h=None):
    """Lengths for the given member indices, in index order regardless of scheduling."""
    indices = list(indices)
    k = resolve_threads(threads)

    def job(i):
        return realization_length(spectrum, M, n, h, master_seed, i, projection_h)

    if k == 1:
        out = [job(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=k) as pool:
            out = list(pool.map(job, indices))  # map preserves order; errors re-raise here
    arr = np.array(out, dtype=float).reshape(-1, 2)
    return arr[:, 0].copy(), arr[:, 1].copy()


def run_ensemble(cfg, n=None, threads=None, projection_h=None):
    """Run ``cfg.realizations`` members at halfwidth ``n`` (default: first of cfg.n)."""
    n = cfg.n[0] if n is None else float(n)
    lengths, proj = run_lengths(cfg.spectrum(), cfg.M, n, cfg.h, cfg.master_seed, range(cfg.realizations),
                                threads if threads is not None else cfg.threads, projection_h)
    stats = EnsembleStats.from_samples(lengths, keep=cfg.keep_lengths)
    return EnsembleResult(stats, lengths, proj, n, cfg.h)


class EnsembleCache:
    """Grows ensembles on demand; member i is the same wherever it is used."""

    def __init__(self, threads=None):
        self.threads = threads
        self._store = {}

    def lengths(self, spectrum, M, n, h, master_seed, count, projection_h=None):
        key = (repr(spectrum), getattr(spectrum, "transform", None) is not None and
               tuple(np.asarray(spectrum.transform).ravel()), int(M), float(n), float(h), int(master_seed),
               projection_h)
        have_l, have_p = self._store.get(key, (np.zeros(0), np.zeros(0)))
        if have_l.size < count:
            extra_l, extra_p = run_lengths(spectrum, M, n, h, master_seed, range(have_l.size, count),
                                           self.threads, projection_h)
            have_l = np.concatenate([have_l, extra_l])
            have_p = np.concatenate([have_p, extra_p])
            self._store[key] = (have_l, have_p)
        return have_l[:count], have_p[:count]
