"""Encoding complex matrices as bipartite GBS programs and exact statistics.

A program is fixed by its transition matrix ``C = U diag(sigma) V^T`` with all
singular values in ``[0, 1)``. The outcome ``(S; T)`` occurs with probability
``|Per(C_{S,T})|^2 / (Z prod s_i! prod t_j!)`` and ``Z = prod 1/(1 - sigma^2)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import matrix_core as mc
from .errors import InputError, InvalidSingularValue

SIGMA_MARGIN = 1e-12
BISECTION_MAX_ITER = 200
SECTOR_MAX_M = 4
SECTOR_MAX_N = 5


@dataclass(frozen=True)
class TransitionMatrix:
    """A validated program. ``log_z`` is always kept; ``z_norm`` may be inf."""

    c: np.ndarray
    svd: mc.SvdResult
    squeezing: np.ndarray
    log_z: float

    @property
    def m(self) -> int:
        return self.c.shape[0]

    @property
    def sigma(self) -> np.ndarray:
        return self.svd.sigma

    @property
    def z_norm(self) -> float:
        try:
            return math.exp(self.log_z)
        except OverflowError:
            return math.inf


@dataclass(frozen=True)
class PhotonPattern:
    """Photon counts ``s`` on the first half of the modes, ``t`` on the second.

    Unequal totals are representable, but have zero probability and are
    rejected by :func:`outcome_probability`.
    """

    s: tuple
    t: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.s)
        t = tuple(int(x) for x in self.t)
        if any(x < 0 for x in s + t):
            raise InputError("photon counts must be non-negative")
        if len(s) != len(t):
            raise InputError("s and t must have equal length")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return sum(self.s)

    @property
    def balanced(self) -> bool:
        return sum(self.s) == sum(self.t)


def log_z_from_sigma(sigma) -> float:
    sigma = np.asarray(sigma, dtype=float)
    return float(-np.sum(np.log1p(-sigma) + np.log1p(sigma)))


def _pairs_from_sigma(sigma):
    s2 = np.asarray(sigma, dtype=float) ** 2
    return float(np.sum(s2 / ((1.0 - np.asarray(sigma)) * (1.0 + np.asarray(sigma)))))


def _from_svd(c, res: mc.SvdResult) -> TransitionMatrix:
    sigma = res.sigma
    if sigma.size and sigma[0] >= 1.0 - SIGMA_MARGIN:
        raise InvalidSingularValue(
            f"largest singular value {sigma[0]:.15g} is not below 1; rescale the matrix first"
        )
    return TransitionMatrix(c, res, np.arctanh(sigma), log_z_from_sigma(sigma))


def encode(c) -> TransitionMatrix:
    """Validate ``c`` as a transition matrix; never rescales."""
    a = mc.as_complex_matrix(c, name="transition matrix")
    if a.shape[0] != a.shape[1]:
        raise InputError("transition matrix must be square")
    a = a.copy()
    a.setflags(write=False)
    return _from_svd(a, mc.svd(a))


def _bisect_scale(sigma, target):
    smax = float(sigma[0])
    lo, hi = 0.0, 1.0 / smax
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _pairs_from_sigma(mid * sigma) < target:
            lo = mid
        else:
            hi = mid
    best = min((lo, hi), key=lambda x: abs(_pairs_from_sigma(x * sigma) - target) if x * smax < 1 else math.inf)
    return best


def rescale_to_mean_pairs(c, target):
    """Scale ``c`` by the unique ``lam`` giving ``target`` mean photon pairs.

    Returns ``(lam, program)``. Bisection runs on ``lam`` in ``(0, 1/sigma_max)``
    down to floating-point resolution.
    """
    if not target > 0 or not math.isfinite(target):
        raise InputError("target mean photon pairs must be positive and finite")
    a = mc.as_complex_matrix(c, name="matrix")
    if a.shape[0] != a.shape[1]:
        raise InputError("matrix must be square")
    res = mc.svd(a)
    sigma = res.sigma
    if sigma.size == 0 or sigma[0] == 0.0:
        raise InputError("cannot rescale the zero matrix to a positive photon number")
    lam = _bisect_scale(sigma, float(target))
    scaled = mc.SvdResult(res.u, lam * sigma, res.v)
    sc = lam * a
    sc.setflags(write=False)
    return lam, _from_svd(sc, scaled)


def mean_photon_pairs(tm: TransitionMatrix) -> float:
    """Mean number of photon pairs, ``sum sigma^2 / (1 - sigma^2)``."""
    return _pairs_from_sigma(tm.sigma)


def _pattern(tm, p):
    if not isinstance(p, PhotonPattern):
        p = PhotonPattern(*p)
    if len(p.s) != tm.m:
        raise InputError(f"pattern has {len(p.s)} modes, program has {tm.m}")
    if not p.balanced:
        raise InputError("pattern has unequal photon totals on the two halves")
    if p.n > mc.PERMANENT_MAX_N:
        raise InputError(f"photon number {p.n} exceeds the permanent cap {mc.PERMANENT_MAX_N}")
    return p


def log_outcome_probability(tm: TransitionMatrix, p) -> float:
    p = _pattern(tm, p)
    sub = mc.submatrix_repeat(tm.c, p.s, p.t)
    per = mc.permanent(sub)
    if per == 0:
        return -math.inf
    logfact = sum(math.lgamma(x + 1) for x in p.s + p.t)
    return 2.0 * math.log(abs(per)) - tm.log_z - logfact


def outcome_probability(tm: TransitionMatrix, p) -> float:
    """Exact probability of the outcome ``p`` (a PhotonPattern or ``(s, t)``)."""
    return math.exp(log_outcome_probability(tm, p))


def pair_number_distribution(tm: TransitionMatrix, n_max) -> np.ndarray:
    """``Pr(n)`` for ``n = 0..n_max`` pairs: a convolution of geometric laws."""
    n_max = int(n_max)
    if n_max < 0:
        raise InputError("n_max must be non-negative")
    dist = np.zeros(n_max + 1)
    dist[0] = 1.0
    k = np.arange(n_max + 1)
    for s in tm.sigma:
        s2 = s * s
        if s2 == 0.0:
            continue
        geo = (1.0 - s2) * s2**k
        dist = np.convolve(dist, geo)[: n_max + 1]
    return dist


def _compositions(n, m):
    for cut in itertools.combinations(range(n + m - 1), m - 1):
        prev = -1
        parts = []
        for c in cut + (n + m - 1,):
            parts.append(c - prev - 1)
            prev = c
        yield tuple(parts)


def exact_sector_mass(tm: TransitionMatrix, n) -> float:
    """Total probability of all outcomes with ``n`` photons per half, by enumeration."""
    n = int(n)
    if tm.m > SECTOR_MAX_M or n > SECTOR_MAX_N or n < 0:
        raise InputError(f"enumeration limited to m <= {SECTOR_MAX_M}, 0 <= n <= {SECTOR_MAX_N}")
    comps = list(_compositions(n, tm.m)) if tm.m else [()]
    total = 0.0
    for s in comps:
        for t in comps:
            total += outcome_probability(tm, PhotonPattern(s, t))
    return total


def program_to_json(tm: TransitionMatrix, lam=1.0) -> dict:
    return {
        "matrix": mc.matrix_to_json(tm.c),
        "lambda": float(lam),
        "sigma": tm.sigma.tolist(),
        "r": tm.squeezing.tolist(),
        "logZ": tm.log_z,
    }


def program_from_json(obj) -> TransitionMatrix:
    try:
        mat = obj["matrix"]
    except (KeyError, TypeError) as exc:
        raise InputError("program JSON needs a 'matrix' entry") from exc
    return encode(mc.matrix_from_json(mat))
