"""Permanents with repeated rows and columns as polynomials in one variable.

Given ``A`` (c x c) and repetition vectors ``s``, ``t`` with entries >= 1,
:func:`build_embedding` produces a matrix ``B(z)`` of shape
``(c + k_t) x (c + k_s)`` such that the permanent of ``B(z)`` with rows
repeated by ``s' = (s, 1, ..., 1)`` and columns by ``t' = (t, 1, ..., 1)`` is
a polynomial in ``z`` of degree at most ``k = k_s + k_t`` whose constant term
is ``xi * Per(A)``. The permanent of ``A`` is then recovered from oracle
values at a handful of ``z``.

Auxiliary variables are stored per repeated mode ``l`` (0-based):

* ``y[l]``: ``c x (s_l - 1)`` block of extra columns,
* ``x[l]``: ``(t_l - 1) x (c + k_s)`` block of extra rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import matrix_core as mc
from .errors import IllConditionedError, InputError, NumericalError

XI_MIN = 1e-12
MAX_RESAMPLES = 64
COND_MAX = 1e12


def _reps(v, c, name):
    arr = np.asarray(v)
    if arr.shape != (c,):
        raise InputError(f"{name} must have length {c}")
    if np.any(arr != np.round(arr)) or np.any(arr < 1):
        raise InputError(f"{name} entries must be integers >= 1")
    return tuple(int(x) for x in arr)


def _square(a):
    a = mc.as_complex_matrix(a, name="A")
    if a.shape[0] != a.shape[1]:
        raise InputError("A must be square")
    return a


def build_row_extension(a, s, y, z) -> np.ndarray:
    """``[A | V^(l) ...]`` over modes with ``s_l > 1`` in ascending order.

    Row ``l`` of block ``V^(l)`` holds ``y[l]`` unchanged; every other row is
    multiplied by ``z``.
    """
    a = _square(a)
    c = a.shape[0]
    s = _reps(s, c, "s")
    blocks = [a]
    for l, sl in enumerate(s):
        if sl == 1:
            continue
        blk = np.asarray(y[l], dtype=np.complex128)
        if blk.shape != (c, sl - 1):
            raise InputError(f"y[{l}] must have shape {(c, sl - 1)}")
        v = z * blk
        v[l] = blk[l]
        blocks.append(v)
    return np.hstack(blocks)


def _extra_rows(width, c, t, x, z):
    rows = []
    for l, tl in enumerate(t):
        if tl == 1:
            continue
        blk = np.asarray(x[l], dtype=np.complex128)
        if blk.shape != (tl - 1, width):
            raise InputError(f"x[{l}] must have shape {(tl - 1, width)}")
        w = z * blk
        w[:, l] = blk[:, l]
        rows.append(w)
    return rows


@dataclass(frozen=True)
class RepetitionEmbedding:
    a: np.ndarray
    s: tuple
    t: tuple
    x: dict = field(repr=False)
    y: dict = field(repr=False)

    @property
    def c(self) -> int:
        return self.a.shape[0]

    @property
    def k_s(self) -> int:
        return sum(self.s) - self.c

    @property
    def k_t(self) -> int:
        return sum(self.t) - self.c

    @property
    def k(self) -> int:
        return self.k_s + self.k_t

    @property
    def s_prime(self) -> tuple:
        return self.s + (1,) * self.k_t

    @property
    def t_prime(self) -> tuple:
        return self.t + (1,) * self.k_s

    @property
    def xi(self) -> complex:
        """``prod s_i! t_i!`` times the product of the un-scaled auxiliary entries."""
        val = complex(math.prod(math.factorial(v) for v in self.s + self.t))
        for l, sl in enumerate(self.s):
            if sl > 1:
                val *= complex(np.prod(np.asarray(self.y[l])[l]))
        for l, tl in enumerate(self.t):
            if tl > 1:
                val *= complex(np.prod(np.asarray(self.x[l])[:, l]))
        return val

    def b(self, z) -> np.ndarray:
        top = build_row_extension(self.a, self.s, self.y, z)
        rows = _extra_rows(top.shape[1], self.c, self.t, self.x, z)
        return np.vstack([top] + rows) if rows else top

    def repeated(self, z) -> np.ndarray:
        """Square matrix ``B(z)`` with the repetition patterns applied."""
        return mc.submatrix_repeat(self.b(z), self.s_prime, self.t_prime)

    def permanent(self, z, *, backend=None) -> complex:
        """``Per`` of :meth:`repeated` evaluated with multiplicity grouping."""
        return mc.permanent_repeated(self.b(z), self.s_prime, self.t_prime, backend=backend)


def sample_variables(c, s, t, rng):
    """Independent standard complex Gaussian ``x`` and ``y`` blocks."""
    gen = mc.as_generator(rng)
    s = _reps(s, c, "s")
    t = _reps(t, c, "t")
    width = c + sum(s) - c

    def g(shape):
        z = gen.standard_normal((2,) + shape)
        return (z[0] + 1j * z[1]) / math.sqrt(2.0)

    y = {l: g((c, sl - 1)) for l, sl in enumerate(s) if sl > 1}
    x = {l: g((tl - 1, width)) for l, tl in enumerate(t) if tl > 1}
    return x, y


def build_embedding(a, s, t, x, y, z=None):
    """Embedding of ``A`` for patterns ``s``, ``t``.

    Returns the :class:`RepetitionEmbedding`, or the matrix ``B(z)`` itself
    when ``z`` is given.
    """
    a = _square(a)
    c = a.shape[0]
    emb = RepetitionEmbedding(a, _reps(s, c, "s"), _reps(t, c, "t"), dict(x), dict(y))
    return emb if z is None else emb.b(z)


def interpolate_constant(evaluator, k) -> complex:
    """Constant term of a degree-``k`` polynomial from its values at the ``(k+1)``-th roots of unity."""
    k = int(k)
    if k < 0:
        raise InputError("k must be non-negative")
    nodes = np.exp(2j * np.pi * np.arange(k + 1) / (k + 1))
    nodes[0] = 1.0
    return complex(sum(complex(evaluator(z)) for z in nodes) / (k + 1))


@dataclass(frozen=True)
class Recovery:
    value: complex | float
    xi: complex
    k: int
    oracle_calls: int
    resamples: int
    diagnostics: dict = field(default_factory=dict)


def _embedding_with_xi(a, s, t, rng):
    gen = mc.as_generator(rng)
    c = a.shape[0]
    for attempt in range(MAX_RESAMPLES + 1):
        x, y = sample_variables(c, s, t, gen)
        emb = build_embedding(a, s, t, x, y)
        if abs(emb.xi) >= XI_MIN:
            return emb, attempt
    raise NumericalError(f"|xi| stayed below {XI_MIN} after {MAX_RESAMPLES} resamples")


def recover_permanent(a, s, t, oracle, rng, *, full_output=False):
    """``Per(A)`` from ``k + 1`` oracle calls on Gaussian-looking repeated matrices.

    ``oracle`` maps a square matrix to (an estimate of) its permanent. The
    result carries the oracle error divided by ``|xi|``.
    """
    a = _square(a)
    emb, resamples = _embedding_with_xi(a, s, t, rng)
    calls = [0]

    def evaluate(z):
        calls[0] += 1
        return oracle(emb.repeated(z))

    gamma0 = interpolate_constant(evaluate, emb.k)
    xi = emb.xi
    value = gamma0 / xi
    if full_output:
        return Recovery(value, xi, emb.k, calls[0], resamples)
    return value


def abs2_step(c, k_s, k_t, delta) -> float:
    """Half-width of the node interval around ``z = 1`` for the |Per|^2 fit."""
    deformed = (c - 1) * (k_s + k_t) + k_s * k_t
    return delta / math.sqrt(deformed) if deformed > 0 else delta


def fit_constant_real(values, z_nodes, degree, centre, half_width):
    """Least-squares polynomial in ``u = (z - centre)/half_width``, evaluated at ``z = 0``.

    Normal equations on a column-scaled design matrix; raises
    :class:`IllConditionedError` when its condition number exceeds ``COND_MAX``.
    """
    u = (np.asarray(z_nodes, dtype=float) - centre) / half_width
    design = np.vander(u, degree + 1, increasing=True)
    scale = np.linalg.norm(design, axis=0)
    scaled = design / scale
    cond = float(np.linalg.cond(scaled))
    if not cond <= COND_MAX:
        raise IllConditionedError(
            f"design matrix condition number {cond:.3g} exceeds {COND_MAX:g}",
            {"condition_number": cond, "degree": degree, "nodes": list(map(float, z_nodes))},
        )
    coef = np.linalg.solve(scaled.T @ scaled, scaled.T @ np.asarray(values, dtype=float)) / scale
    u0 = (0.0 - centre) / half_width
    return float(np.polynomial.polynomial.polyval(u0, coef)), cond


def recover_permanent_abs2(a, s, t, oracle2, delta, rng, *, full_output=False):
    """``|Per(A)|^2`` from ``2k + 1`` evaluations of ``|Per|^2`` at real ``z`` near 1."""
    a = _square(a)
    if not 0.0 < delta < 1.0:
        raise InputError("delta must lie in (0, 1)")
    emb, resamples = _embedding_with_xi(a, s, t, rng)
    k = emb.k
    xi = emb.xi
    if k == 0:
        val = float(oracle2(emb.repeated(1.0)))
        out = Recovery(val / abs(xi) ** 2, xi, 0, 1, resamples, {"gamma": 0.0})
        return out if full_output else out.value
    gamma = abs2_step(emb.c, emb.k_s, emb.k_t, delta)
    nodes = np.linspace(1.0 - gamma, 1.0 + gamma, 2 * k + 1)
    vals = [float(oracle2(emb.repeated(z))) for z in nodes]
    beta0, cond = fit_constant_real(vals, nodes, 2 * k, 1.0, gamma)
    out = Recovery(beta0 / abs(xi) ** 2, xi, k, len(nodes), resamples, {"gamma": gamma, "condition_number": cond})
    return out if full_output else out.value


def expected_repeated_permanent(s, t) -> float:
    """``log E|Per(A_{S,T})|^2 = log(n! prod s_i! prod t_j!)`` for Gaussian ``A``."""
    s = [int(v) for v in s]
    t = [int(v) for v in t]
    if any(v < 0 for v in s + t):
        raise InputError("repetition counts must be non-negative")
    n = sum(s)
    if n != sum(t):
        raise InputError("sum(s) must equal sum(t)")
    return math.lgamma(n + 1) + sum(math.lgamma(v + 1) for v in s + t)


def _batched_permanent(stack):
    """Permanents of a stack of small square matrices by permutation expansion."""
    n = stack.shape[-1]
    rows = np.arange(n)
    total = np.zeros(stack.shape[0], dtype=np.complex128)
    for perm in itertools.permutations(range(n)):
        total += np.prod(stack[:, rows, list(perm)], axis=1)
    return total


def repeated_permanent_second_moment(s, t, trials, rng, chunk=20000):
    """Monte Carlo ``(mean, standard error)`` of ``|Per(A_{S,T})|^2`` for Gaussian ``A``."""
    s = [int(v) for v in s]
    t = [int(v) for v in t]
    if len(s) != len(t):
        raise InputError("s and t must have equal length")
    c = len(s)
    n = sum(s)
    if n != sum(t):
        raise InputError("sum(s) must equal sum(t)")
    if n > 8:
        raise InputError("Monte Carlo limited to n <= 8")
    gen = mc.as_generator(rng)
    rows = np.repeat(np.arange(c), s)
    cols = np.repeat(np.arange(c), t)
    samples = []
    left = int(trials)
    while left > 0:
        b = min(chunk, left)
        z = gen.standard_normal((2, b, c, c))
        a = (z[0] + 1j * z[1]) / math.sqrt(2.0)
        sub = a[:, rows][:, :, cols]
        samples.append(np.abs(_batched_permanent(sub)) ** 2)
        left -= b
    v = np.concatenate(samples)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


@dataclass(frozen=True)
class XiStatistics:
    k: int
    trials: int
    log_prefactor: float
    freq_x: float
    freq_xi: float
    mean_log_factor: float
    var_log_factor: float
    var_log_x_per_k: float

    X_THRESHOLD_BASE = 0.7493
    XI_THRESHOLD_BASE = 1.498


def default_xi_pattern(k):
    """Patterns with ``k`` collisions and the smallest prefactor ``prod s_i! t_i! = 2^k``."""
    k = int(k)
    ks, kt = (k + 1) // 2, k // 2
    c = max(ks, kt, 1)
    s = [2 if i < ks else 1 for i in range(c)]
    t = [2 if i < kt else 1 for i in range(c)]
    return s, t


def xi_statistics(k, trials, rng, chunk=10000) -> XiStatistics:
    """Empirical law of ``X``, the product of ``k`` standard complex Gaussian magnitudes.

    ``|xi| = prefactor * X`` with the minimal prefactor ``2^k``; the report
    gives ``Pr[X >= 0.7493^k]``, ``Pr[|xi| >= 1.498^k]`` and the per-factor
    mean and variance of ``log |g|``.
    """
    k, trials = int(k), int(trials)
    if k < 1 or trials < 2:
        raise InputError("need k >= 1 and at least two trials")
    gen = mc.as_generator(rng)
    s, t = default_xi_pattern(k)
    log_pref = sum(math.lgamma(v + 1) for v in s + t)
    log_x = np.empty(trials)
    fsum = 0.0
    fsq = 0.0
    done = 0
    while done < trials:
        b = min(chunk, trials - done)
        z = gen.standard_normal((2, b, k))
        lg = 0.5 * np.log((z[0] ** 2 + z[1] ** 2) / 2.0)
        log_x[done:done + b] = lg.sum(axis=1)
        fsum += float(lg.sum())
        fsq += float((lg * lg).sum())
        done += b
    nf = trials * k
    mean_f = fsum / nf
    var_f = (fsq - nf * mean_f * mean_f) / (nf - 1)
    return XiStatistics(
        k, trials, log_pref,
        float(np.mean(log_x >= k * math.log(XiStatistics.X_THRESHOLD_BASE))),
        float(np.mean(log_pref + log_x >= k * math.log(XiStatistics.XI_THRESHOLD_BASE))),
        mean_f, var_f, float(np.var(log_x, ddof=1) / k),
    )
