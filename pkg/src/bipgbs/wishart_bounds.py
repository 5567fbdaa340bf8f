"""Wishart-ensemble closed forms, tail bounds and the hardness ratio ``I``.

Throughout, ``C`` has i.i.d. complex Gaussian entries of variance
``1/(alpha^2 m)`` and ``A = C C^dagger`` is the associated complex Wishart
matrix, whose eigenvalues are the squared singular values of ``C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matrix_core as mc
from .errors import InputError, InvalidSingularValue, OutsideValidityRegion

DEFAULT_BETA = 4.0
# relative error tolerated in the direct alternating sum before switching paths
CANCELLATION_TOL = 1e-6


@dataclass(frozen=True)
class WishartSample:
    m: int
    alpha: float
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class IRatioPoint:
    m: int
    alpha: float
    n: int
    c: int | None
    log_z: float
    log_i: float


def _check_m_alpha(m, alpha):
    if int(m) != m or m < 1:
        raise InputError("m must be a positive integer")
    if not alpha > 0:
        raise InputError("alpha must be positive")


# ----------------------------------------------------------- trace moments


def _pochhammer(a, k):
    out = 1
    for j in range(k):
        out *= a + j
    return out


def log_wishart_trace_moment(m, alpha, k) -> float:
    """``log E[Tr A^k]``, computed from an exact rational sum."""
    _check_m_alpha(m, alpha)
    m = int(m)
    k = int(k)
    if k < 1:
        raise InputError("k must be at least 1")
    total = Fraction(0)
    for i in range(1, k + 1):
        term = Fraction(_pochhammer(m + 1 - i, k) ** 2, math.factorial(k - i) * math.factorial(i - 1))
        total += term if i % 2 else -term
    total /= k
    if total <= 0:
        raise InputError("trace moment sum is not positive")
    log_sum = math.log(total.numerator) - math.log(total.denominator)
    return log_sum - k * math.log(alpha * alpha * m)


def wishart_trace_moment(m, alpha, k) -> float:
    """``E[Tr A^k]``; may overflow to inf, see :func:`log_wishart_trace_moment`."""
    try:
        return math.exp(log_wishart_trace_moment(m, alpha, k))
    except OverflowError:
        return math.inf


def trace_moments_lemma(m, alpha):
    """``(E[Tr A], E[(Tr A)^2], E[exp Tr A])`` for the ensemble."""
    _check_m_alpha(m, alpha)
    x = 1.0 / (alpha * alpha * m)
    if x >= 1.0:
        raise InputError("E[exp Tr A] diverges for alpha^2 m <= 1")
    return m / alpha**2, (m * m + 1) / alpha**4, math.exp(-m * m * math.log1p(-x))


# --------------------------------------------------- characteristic polynomial


def _log_laguerre_dominant(n, y):
    """``log |L_n(y)|`` by the forward three-term recurrence with rescaling.

    Only used for ``y`` beyond the largest zero of ``L_n`` where ``L_n`` is the
    dominant solution of the recurrence and forward iteration is stable.
    """
    if n == 0:
        return 0.0
    prev, cur = 1.0, 1.0 - y
    log_scale = 0.0
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 - y) * cur - j * prev) / (j + 1)
        big = abs(cur)
        if big > 1e150 or big < 1e-150:
            e = math.log(big)
            prev /= big
            cur /= big
            log_scale += e
    return log_scale + math.log(abs(cur))


def _log_z_inverse_direct(m, y):
    """Direct alternating sum; returns (log value or None, condition estimate)."""
    i = np.arange(m + 1)
    logs = (
        2.0 * (math.lgamma(m + 1) - np.array([math.lgamma(j + 1) + math.lgamma(m - j + 1) for j in i]))
        + np.array([math.lgamma(j + 1) for j in i])
        - i * math.log(y)
    )
    top = logs.max()
    mags = np.exp(logs - top)
    signed = np.where(i % 2, -mags, mags)
    total = math.fsum(signed)
    abs_total = math.fsum(mags)
    if total <= 0:
        return None, math.inf
    cond = abs_total / total
    return top + math.log(total), cond


def z_inverse_expectation(m, alpha, *, return_method=False):
    """``log E[1/Z]`` over the Wishart ensemble (Edelman's formula).

    ``E[1/Z] = sum_i binom(m,i)^2 i! (-1/(alpha^2 m))^i``. The alternating sum
    is evaluated directly with exactly rounded summation when the cancellation
    is mild. When the estimated relative error exceeds ``CANCELLATION_TOL``
    the value is obtained from the equivalent Laguerre form
    ``(-1)^m m! y^-m L_m(y)``, ``y = alpha^2 m``, by a stable recurrence.
    """
    _check_m_alpha(m, alpha)
    m = int(m)
    y = alpha * alpha * m
    val, cond = _log_z_inverse_direct(m, y)
    method = "direct"
    if val is None or cond * np.finfo(float).eps * (m + 1) > CANCELLATION_TOL:
        if y <= 4.0 * m + 2.0 * math.sqrt(m) + 2.0:
            raise InputError("Laguerre path requires alpha^2 m beyond the largest zero (alpha > 2)")
        val = math.lgamma(m + 1) - m * math.log(y) + _log_laguerre_dominant(m, y)
        method = "laguerre"
    val = float(val)
    return (val, method) if return_method else val


# --------------------------------------------------------------- sampling


def sample_wishart(m, alpha, rng) -> WishartSample:
    """Eigenvalues (descending) of ``C C^dagger`` for one Gaussian draw of ``C``."""
    _check_m_alpha(m, alpha)
    m = int(m)
    c = mc.sample_gaussian_matrix(m, m, 0.0, 1.0 / (alpha * alpha * m), rng)
    lam = np.linalg.eigvalsh(c @ c.conj().T)[::-1]
    return WishartSample(m, float(alpha), np.clip(lam, 0.0, None))


def z_from_sample(ws: WishartSample) -> float:
    """``log Z = -sum log(1 - lambda_i)``."""
    lam = np.asarray(ws.eigenvalues, dtype=float)
    if np.any(lam >= 1.0):
        raise InvalidSingularValue("eigenvalue >= 1: the sample is not a valid program")
    return float(-np.sum(np.log1p(-lam)))


def mean_pairs_from_sample(ws: WishartSample) -> float:
    lam = np.asarray(ws.eigenvalues, dtype=float)
    if np.any(lam >= 1.0):
        raise InvalidSingularValue("eigenvalue >= 1: the sample is not a valid program")
    return float(np.sum(lam / (1.0 - lam)))


# ------------------------------------------------------ photon numbers / I


def mean_pairs_expected(m, alpha) -> float:
    """Quarter-circle prediction of the ensemble mean photon-pair number.

    Evaluated as ``m (1 - s)/(1 + s)`` with ``s = sqrt(1 - 4/alpha^2)``,
    which avoids the cancellation of the expanded form at large ``alpha``.
    """
    if not alpha > 2:
        raise InputError("alpha must exceed 2")
    s = math.sqrt(1.0 - 4.0 / (alpha * alpha))
    return m * (4.0 / (alpha * alpha)) / (1.0 + s) ** 2


def _log_binom(a, b):
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def i_ratio(m, alpha, n, c=None, log_z=0.0) -> float:
    """``log I = log Z + 2n log alpha + n log m - log|H| - log n!``.

    Without ``c`` the outcome space is the collision-free one,
    ``|H| = binom(m, n)^2``; with ``c`` clicks per half it is
    ``binom(m, c)^2 binom(n-1, n-c)^2``.
    """
    m, n = int(m), int(n)
    if n < 0 or n > m:
        raise InputError("need 0 <= n <= m")
    if not alpha > 0:
        raise InputError("alpha must be positive")
    if c is None:
        log_h = 2.0 * _log_binom(m, n)
    else:
        c = int(c)
        if c < 0 or c > min(m, n) or (n > 0 and c == 0):
            raise InputError("need 1 <= c <= min(m, n)")
        log_h = 2.0 * _log_binom(m, c) + (2.0 * _log_binom(n - 1, n - c) if n > 0 else 0.0)
    return float(log_z + 2 * n * math.log(alpha) + n * math.log(m) - log_h - math.lgamma(n + 1))


def collision_subspace_params(m, alpha):
    """``(n, c, feasible)``: rounded mean pairs, mean clicks per half, and ``2(n-c) <= c``.

    The flag is judged on the unrounded expectations; at ``alpha = 3/sqrt(2)``
    the condition is an exact tie that rounding would otherwise break.
    """
    n_exp = mean_pairs_expected(m, alpha)
    mu = n_exp / m
    c_exp = m * mu / (1.0 + mu)
    feasible = 2.0 * (n_exp - c_exp) <= c_exp * (1.0 + 1e-9)
    return int(round(n_exp)), int(round(c_exp)), bool(feasible)


def i_ratio_point(m, alpha) -> IRatioPoint:
    """``I`` on the collision subspace with ``Z`` estimated by ``1/E[1/Z]``."""
    n, c, _ = collision_subspace_params(m, alpha)
    log_z = -z_inverse_expectation(m, alpha)
    c_arg = c if n > 0 else None
    return IRatioPoint(int(m), float(alpha), n, c, log_z, i_ratio(m, alpha, n, c_arg, log_z))


def loglog_slope(ms, values_log):
    """Least-squares slope of ``values_log`` (natural log) against ``log m``."""
    x = np.log(np.asarray(ms, dtype=float))
    slope, _ = np.polyfit(x, np.asarray(values_log, dtype=float), 1)
    return float(slope)


# ------------------------------------------------------------------ bounds


@dataclass(frozen=True)
class BoundRhs:
    """Right-hand sides of the tail bounds; ``None`` where outside validity."""

    mean_pairs_dev: float | None
    pairs_dev: float | None
    log_z_threshold: float | None
    thm_mean_pairs_dev: float | None
    thm_pairs_dev: float | None
    thm_log_z_threshold: float | None
    lambda_max_eps: float | None


def _check_delta(delta):
    if not 0.0 < delta <= 1.0:
        raise InputError("delta must lie in (0, 1]")


def lemma_region_ok(m, alpha, delta) -> bool:
    return alpha >= 6.0 and m >= math.log(1.0 / delta)


def theorem_region_ok(m, alpha, delta, beta=DEFAULT_BETA) -> bool:
    return beta >= 4.0 and alpha * alpha >= 8.0 * beta and m >= math.log(1.0 / delta) / beta**2


def _require(ok, what):
    if not ok:
        raise OutsideValidityRegion(f"{what}: parameters outside the region where the bound holds")


def mean_pairs_deviation_rhs(m, alpha, delta, beta=None) -> float:
    """Deviation of ``<n>`` from ``m/alpha^2`` exceeded with probability at most ``delta``.

    ``beta=None`` gives the lemma form (``alpha >= 6``); a numeric ``beta``
    gives the general theorem form.
    """
    _check_delta(delta)
    if beta is None:
        _require(lemma_region_ok(m, alpha, delta), "mean photon-pair bound")
        lead = 512.0 * m / alpha**4
    else:
        _require(theorem_region_ok(m, alpha, delta, beta), "mean photon-pair bound")
        lead = 32.0 * beta**2 * m / alpha**4
    return lead + math.sqrt(2.0 / delta) / alpha**2


def pairs_deviation_rhs(m, alpha, delta, beta=None) -> float:
    """Deviation of the observed pair number ``n`` from ``m/alpha^2`` (prob. at most ``delta``)."""
    _check_delta(delta)
    if beta is None:
        _require(lemma_region_ok(m, alpha, delta), "photon-pair bound")
        mid, lead = 84.0, 512.0 * m / alpha**4
    else:
        _require(theorem_region_ok(m, alpha, delta, beta), "photon-pair bound")
        mid, lead = 21.0 * beta, 32.0 * beta**2 * m / alpha**4
    sm = math.sqrt(m)
    return (
        2.0 * sm / (alpha * math.sqrt(delta))
        + 3.0 / (alpha * delta**0.75)
        + mid * sm / (alpha**2 * math.sqrt(delta))
        + lead
    )


def log_z_threshold(m, alpha, delta, beta=None) -> float:
    """``log`` of the level that ``Z`` exceeds with probability at most ``delta``.

    The lemma form uses the constant 272, the theorem form ``17 beta^2``
    (the two agree at ``beta = 4``).
    """
    _check_delta(delta)
    if beta is None:
        _require(lemma_region_ok(m, alpha, delta), "normalisation bound")
        const = 272.0
    else:
        _require(theorem_region_ok(m, alpha, delta, beta), "normalisation bound")
        const = 17.0 * beta**2
    return math.log(2.0 / delta) + m / alpha**2 + const * m / alpha**4


def lambda_max_tail(m, alpha, eps) -> float:
    """Upper bound ``m exp(-m alpha^4 eps^2 / 8)`` on ``Pr[lambda_max >= 4/alpha^2 + eps]``."""
    if not eps > 0:
        raise InputError("eps must be positive")
    return min(1.0, m * math.exp(-m * alpha**4 * eps * eps / 8.0))


def lambda_max_eps(m, alpha, delta) -> float:
    """Smallest ``eps`` for which the max-eigenvalue tail bound equals ``delta``."""
    _check_delta(delta)
    return math.sqrt(8.0 * math.log(m / delta) / (m * alpha**4)) if m > delta else 0.0


def bound_rhs_evaluators(m, alpha, delta, beta=DEFAULT_BETA) -> BoundRhs:
    """All bound right-hand sides at once; entries outside validity are ``None``."""

    def attempt(fn, *args):
        try:
            return fn(*args)
        except OutsideValidityRegion:
            return None

    eps = lambda_max_eps(m, alpha, delta)
    return BoundRhs(
        attempt(mean_pairs_deviation_rhs, m, alpha, delta),
        attempt(pairs_deviation_rhs, m, alpha, delta),
        attempt(log_z_threshold, m, alpha, delta),
        attempt(mean_pairs_deviation_rhs, m, alpha, delta, beta),
        attempt(pairs_deviation_rhs, m, alpha, delta, beta),
        attempt(log_z_threshold, m, alpha, delta, beta),
        eps if eps > 0 else None,
    )


# ------------------------------------------------------------ calibration


@dataclass(frozen=True)
class ZCalibration:
    m: int
    alpha: float
    samples: int
    logZ_formula: float
    mean_logZ_sampled: float
    sd_logZ: float

    CSV_COLUMNS = ("m", "alpha", "logZ_formula", "mean_logZ_sampled", "sd_logZ")

    def row(self):
        return {k: getattr(self, k) for k in self.CSV_COLUMNS}


def z_calibration(m, alpha, samples, seed) -> ZCalibration:
    """Compare ``-log E[1/Z]`` with ``log Z`` over ``samples`` Wishart draws."""
    samples = int(samples)
    if samples < 2:
        raise InputError("need at least two samples")
    logs = np.array([z_from_sample(sample_wishart(m, alpha, mc.RngStream(int(seed), i))) for i in range(samples)])
    return ZCalibration(
        int(m), float(alpha), samples, -z_inverse_expectation(m, alpha),
        float(logs.mean()), float(logs.std(ddof=1)),
    )
