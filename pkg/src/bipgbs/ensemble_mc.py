"""Monte Carlo over Gaussian transition matrices.

Every trial draws from its own :class:`RngStream` ``(seed, trial)`` so the
result does not depend on how trials are distributed over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import covariance_stats as cs
from . import gbs_encoding as ge
from . import matrix_core as mc
from . import wishart_bounds as wb
from .errors import BipgbsError, InputError, NumericalError

MAX_RETRIES = 16


def resolve_threads(threads) -> int:
    threads = int(threads or 0)
    if threads < 0:
        raise InputError("threads must be non-negative")
    return threads or (os.cpu_count() or 1)


def _parallel_map(fn, items, threads):
    items = list(items)
    threads = resolve_threads(threads)
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def trial_stream(seed, trial, retry=0) -> mc.RngStream:
    return mc.RngStream(int(seed), (int(retry) << 32) | int(trial))


def _sd(x):
    return float(np.std(x, ddof=1)) if len(x) > 1 else math.nan


@dataclass(frozen=True)
class EnsembleReport:
    """Per-trial click moments and their ensemble aggregates.

    ``sd_*`` fields are sample standard deviations across trials (the spread
    of the per-matrix quantity); divide by ``sqrt(trials)`` for the standard
    error of the corresponding mean, see :meth:`standard_error`.
    """

    m: int
    mu: float
    trials: int
    seed: int
    moments: tuple = field(repr=False)
    retries: int = 0

    def _col(self, name):
        return np.array([getattr(cm, name) for cm in self.moments])

    @property
    def mean_d(self):
        return float(self._col("mean_d").mean())

    @property
    def sd_mean_d(self):
        return _sd(self._col("mean_d"))

    @property
    def var_d(self):
        return float(self._col("var_d").mean())

    @property
    def sd_var_d(self):
        return _sd(self._col("var_d"))

    @property
    def var_sum(self):
        return float(self._col("var_sum").mean())

    @property
    def sd_var_sum(self):
        return _sd(self._col("var_sum"))

    def standard_error(self, name):
        return getattr(self, "sd_" + name) / math.sqrt(self.trials)

    @property
    def theory_mean_d(self):
        return cs.analytic_click_mean(self.m, self.mu)

    @property
    def theory_var_d(self):
        return cs.analytic_click_variances(self.m, self.mu)[0]

    @property
    def theory_var_sum(self):
        return cs.analytic_click_variances(self.m, self.mu)[1]

    CSV_COLUMNS = (
        "m", "mu", "trials", "mean_d", "sd_mean_d", "var_d", "sd_var_d",
        "var_sum", "sd_var_sum", "theory_mean_d", "theory_var_d", "theory_var_sum",
    )

    def row(self):
        return {k: getattr(self, k) for k in self.CSV_COLUMNS}


def _click_trial(m, mu, seed, trial):
    for retry in range(MAX_RETRIES):
        c = mc.sample_gaussian_matrix(m, m, 0.0, 1.0, trial_stream(seed, trial, retry))
        try:
            _, tm = ge.rescale_to_mean_pairs(c, mu * m)
            return cs.click_moments_exact(cs.husimi_blocks(tm)), retry
        except BipgbsError:
            continue
    raise NumericalError(f"trial {trial}: no usable draw after {MAX_RETRIES} attempts")


def run_click_experiment(m, mu, trials, seed, threads=1) -> EnsembleReport:
    """Exact click moments for ``trials`` Gaussian matrices rescaled to ``mu m`` mean pairs."""
    m, trials = int(m), int(trials)
    if m < 1:
        raise InputError("m must be positive")
    if not 0.0 < mu < 1.0:
        raise InputError("mu must lie in (0, 1)")
    if trials < 2:
        raise InputError("need at least two trials")
    out = _parallel_map(lambda t: _click_trial(m, mu, seed, t), range(trials), threads)
    return EnsembleReport(
        m, float(mu), trials, int(seed),
        tuple(r[0] for r in out), sum(r[1] for r in out),
    )


def sample_pair_numbers(tm, rng, size=None) -> np.ndarray:
    """Pairs emitted by each squeezer: geometric with success probability ``1 - sigma^2``.

    Returns shape ``(m,)`` or ``(size, m)``.
    """
    sigma = tm.sigma if hasattr(tm, "sigma") else np.asarray(tm, dtype=float)
    gen = rng.generator() if isinstance(rng, mc.RngStream) else rng
    p = 1.0 - np.asarray(sigma, dtype=float) ** 2
    shape = p.shape if size is None else (int(size),) + p.shape
    return gen.geometric(np.broadcast_to(p, shape)) - 1


@dataclass(frozen=True)
class ConcentrationReport:
    m: int
    alpha: float
    delta: float
    trials: int
    mean_pairs_rhs: float
    pairs_rhs: float
    freq_mean_pairs: float
    freq_pairs: float

    @property
    def holds(self) -> bool:
        return self.freq_mean_pairs <= self.delta and self.freq_pairs <= self.delta


def _concentration_trial(m, alpha, seed, trial):
    stream = trial_stream(seed, trial)
    ws = wb.sample_wishart(m, alpha, stream)
    mean_n = wb.mean_pairs_from_sample(ws)
    n = int(sample_pair_numbers(np.sqrt(ws.eigenvalues), stream.child(1)).sum())
    return mean_n, n


def n_concentration_check(m, alpha, trials, delta, seed, threads=1) -> ConcentrationReport:
    """Empirical violation frequencies of the two photon-number deviation bounds."""
    m, trials = int(m), int(trials)
    rhs_mean = wb.mean_pairs_deviation_rhs(m, alpha, delta)
    rhs_n = wb.pairs_deviation_rhs(m, alpha, delta)
    out = _parallel_map(lambda t: _concentration_trial(m, alpha, seed, t), range(trials), threads)
    mean_n = np.array([o[0] for o in out])
    n = np.array([o[1] for o in out], dtype=float)
    centre = m / alpha**2
    return ConcentrationReport(
        m, float(alpha), float(delta), trials, rhs_mean, rhs_n,
        float(np.mean(np.abs(mean_n - centre) >= rhs_mean)),
        float(np.mean(np.abs(n - centre) >= rhs_n)),
    )


def thermal_moments(sigma2, draws, rng):
    """Sample ``<n>``, ``<n^2>`` and the standard error of ``<n^2>`` for one squeezer."""
    if not 0.0 <= sigma2 < 1.0:
        raise InputError("sigma^2 must lie in [0, 1)")
    n = sample_pair_numbers(np.array([math.sqrt(sigma2)]), rng, size=int(draws))[:, 0].astype(float)
    n2 = n * n
    return float(n.mean()), float(n2.mean()), float(n2.std(ddof=1) / math.sqrt(n2.size))


@dataclass(frozen=True)
class TailBoundReport:
    """Violation frequencies of each tail bound next to its ``delta``."""

    m: int
    alpha: float
    delta: float
    trials: int
    freq_lambda_max: float
    freq_mean_pairs: float
    freq_pairs: float
    freq_z: float

    def holds(self) -> dict:
        return {
            "lambda_max": self.freq_lambda_max <= self.delta,
            "mean_pairs": self.freq_mean_pairs <= self.delta,
            "pairs": self.freq_pairs <= self.delta,
            "z": self.freq_z <= self.delta,
        }


def _tail_trial(m, alpha, seed, trial):
    stream = trial_stream(seed, trial)
    ws = wb.sample_wishart(m, alpha, stream)
    n = int(sample_pair_numbers(np.sqrt(ws.eigenvalues), stream.child(1)).sum())
    return ws.eigenvalues[0], wb.mean_pairs_from_sample(ws), n, wb.z_from_sample(ws)


def validate_tail_bounds(m, alpha, delta, trials, seed, threads=1) -> TailBoundReport:
    """Empirical check of the max-eigenvalue, photon-number and normalisation bounds.

    The max-eigenvalue bound is tested at the ``eps`` for which its right-hand
    side equals ``delta``. The other bounds refuse parameters outside their
    validity region.
    """
    m, trials = int(m), int(trials)
    rhs_mean = wb.mean_pairs_deviation_rhs(m, alpha, delta)
    rhs_n = wb.pairs_deviation_rhs(m, alpha, delta)
    log_zt = wb.log_z_threshold(m, alpha, delta)
    eps = wb.lambda_max_eps(m, alpha, delta)
    out = _parallel_map(lambda t: _tail_trial(m, alpha, seed, t), range(trials), threads)
    lmax, mean_n, n, log_z = (np.array(col, dtype=float) for col in zip(*out))
    centre = m / alpha**2
    return TailBoundReport(
        m, float(alpha), float(delta), trials,
        float(np.mean(lmax >= 4.0 / alpha**2 + eps)),
        float(np.mean(np.abs(mean_n - centre) >= rhs_mean)),
        float(np.mean(np.abs(n - centre) >= rhs_n)),
        float(np.mean(log_z >= log_zt)),
    )
