"""Dense complex matrices, Gaussian ensembles, SVD and permanent kernels.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``;
:func:`as_complex_matrix` validates shape and finiteness.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, InputError

PERMANENT_MAX_N = 30
REPEATED_MAX_TERMS = 2.0**34
REPEATED_DP_MAX_STATES = 2.0**24
# stop trying further evaluations once the error bound is this small
REPEATED_TARGET_BOUND = 1e-12
PERMANENT_NAIVE_MAX_N = 9
HAFNIAN_NAIVE_MAX_N = 7
SVD_TOL = 1e-12
SVD_MAX_SWEEPS = 100


def as_complex_matrix(m, *, name="matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D complex128 array or raise InputError."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got shape {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} has non-finite entries")
    return arr


def _square(m, name="matrix"):
    arr = as_complex_matrix(m, name=name)
    if arr.shape[0] != arr.shape[1]:
        raise InputError(f"{name} must be square, got shape {arr.shape}")
    return arr


def matrix_to_json(m) -> dict:
    arr = as_complex_matrix(m)
    flat = arr.ravel()
    return {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "re": flat.real.tolist(),
        "im": flat.imag.tolist(),
    }


def matrix_from_json(obj) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros(rows * cols)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad matrix JSON: {exc}") from exc
    if rows < 0 or cols < 0 or re.size != rows * cols or im.size != rows * cols:
        raise InputError("matrix JSON: entry count does not match rows*cols")
    return as_complex_matrix((re + 1j * im).reshape(rows, cols))


# ---------------------------------------------------------------- permanents


def permanent(m, *, backend=None) -> complex:
    """Permanent by Glynn's formula with Gray-code updates.

    Cost is O(n 2^n). ``backend`` picks the kernel ("numba" or "numpy");
    by default it follows the ``BIPGBS_KERNELS`` environment variable.
    """
    a = _square(m)
    n = a.shape[0]
    if n > PERMANENT_MAX_N:
        raise InputError(f"permanent size {n} exceeds the cap {PERMANENT_MAX_N}")
    return complex(kernels.get_backend(backend).permanent(a))


def permanent_naive(m) -> complex:
    """Permanent as an explicit sum over all n! permutations."""
    a = _square(m)
    n = a.shape[0]
    if n > PERMANENT_NAIVE_MAX_N:
        raise InputError(f"naive permanent limited to n <= {PERMANENT_NAIVE_MAX_N}")
    rows = np.arange(n)
    total = 0j
    for perm in itertools.permutations(range(n)):
        total += np.prod(a[rows, list(perm)])
    return complex(total)


def _matchings(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        for tail in _matchings(rest[:k] + rest[k + 1:]):
            yield [(first, partner)] + tail


def hafnian_naive(a, *, sym_tol=1e-12) -> complex:
    """Hafnian by enumerating the (2n-1)!! perfect matchings."""
    arr = _square(a)
    dim = arr.shape[0]
    if dim % 2:
        raise InputError("hafnian needs an even dimension")
    if dim // 2 > HAFNIAN_NAIVE_MAX_N:
        raise InputError(f"naive hafnian limited to n <= {HAFNIAN_NAIVE_MAX_N}")
    if dim and np.max(np.abs(arr - arr.T)) > sym_tol:
        raise InputError("hafnian input must be symmetric")
    total = 0j
    for match in _matchings(list(range(dim))):
        prod = 1 + 0j
        for i, j in match:
            prod *= arr[i, j]
        total += prod
    return complex(total)


# ------------------------------------------------------------------------ RNG


@dataclass(frozen=True)
class RngStream:
    """Value type naming one independent random stream.

    The generator is Philox (counter based) keyed by a ``SeedSequence`` whose
    spawn key is ``stream_index``, so streams are reproducible and independent
    of whichever thread consumes them.
    """

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_index"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 0 or val >= 2**64:
                raise InputError(f"{name} must be an integer in [0, 2**64)")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index) -> "RngStream":
        """Stream for sub-task ``index`` (derived deterministically)."""
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index), int(index)))
        return RngStream(int(ss.generate_state(1, np.uint64)[0]), int(index))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InputError("rng must be an RngStream or numpy Generator")


def sample_gaussian_matrix(rows, cols, mean=0.0, variance=1.0, rng=None) -> np.ndarray:
    """i.i.d. complex Gaussian entries with E|x - mean|^2 = variance.

    Real and imaginary parts are independent normals, each with variance
    ``variance / 2`` (standard normals from numpy's ziggurat, then scaled).
    ``mean`` may be complex.
    """
    if not variance > 0:
        raise InputError("variance must be positive")
    if rows < 0 or cols < 0:
        raise InputError("matrix dimensions must be non-negative")
    if rng is None:
        raise InputError("an RngStream is required")
    gen = as_generator(rng)
    z = gen.standard_normal((2, int(rows), int(cols)))
    scale = math.sqrt(variance / 2.0)
    return mean + scale * (z[0] + 1j * z[1])


# ------------------------------------------------------------------------ SVD


@dataclass(frozen=True)
class SvdResult:
    """``input == u @ diag(sigma) @ v.T`` with ``u``, ``v`` unitary."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def _complete_orthonormal(q, keep):
    """Replace columns of ``q`` not flagged in ``keep`` by an orthonormal completion."""
    m = q.shape[0]
    basis = [q[:, j] for j in range(q.shape[1]) if keep[j]]
    extra = []
    for e in np.eye(m, dtype=np.complex128):
        if len(basis) + len(extra) == m:
            break
        w = e.copy()
        for _ in range(2):
            for b in basis + extra:
                w -= b * np.vdot(b, w)
        nrm = np.linalg.norm(w)
        if nrm > 0.5:
            extra.append(w / nrm)
    out = q.copy()
    it = iter(extra)
    for j in range(q.shape[1]):
        if not keep[j]:
            out[:, j] = next(it)
    return out


def svd(m, *, tol=SVD_TOL, max_sweeps=SVD_MAX_SWEEPS, backend=None) -> SvdResult:
    """Singular value decomposition by one-sided Jacobi rotations.

    Returns ``SvdResult(u, sigma, v)`` with ``m == u diag(sigma) v^T``;
    note the plain transpose, so ``v`` is the conjugate of the usual right
    singular vectors.
    """
    a = _square(m)
    n = a.shape[0]
    if n == 0:
        e = np.zeros((0, 0), dtype=np.complex128)
        return SvdResult(e, np.zeros(0), e)
    a_rot, vacc, sweeps = kernels.get_backend(backend).jacobi_svd(a, tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")
    sigma = np.linalg.norm(a_rot, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    a_rot = a_rot[:, order]
    vacc = vacc[:, order]
    smax = sigma[0] if n else 0.0
    keep = sigma > max(smax * n * np.finfo(float).eps, 1e-300)
    u = np.zeros_like(a_rot)
    u[:, keep] = a_rot[:, keep] / sigma[keep]
    if not keep.all():
        u = _complete_orthonormal(u, keep)
    return SvdResult(u, sigma, np.conj(vacc))


# ---------------------------------------------------------------- submatrices


def _counts(x, m, name):
    arr = np.asarray(x)
    if arr.shape != (m,):
        raise InputError(f"{name} must have length {m}")
    if not np.all(np.equal(np.mod(arr, 1), 0)) or np.any(arr < 0):
        raise InputError(f"{name} entries must be non-negative integers")
    return arr.astype(np.int64)


def submatrix_repeat(c, s, t) -> np.ndarray:
    """Rows of ``c`` repeated ``s_i`` times and columns ``t_j`` times.

    Rows with ``s_i == 0`` (columns with ``t_j == 0``) are dropped; the order
    of modes is preserved. ``c`` may be rectangular as long as the result is
    square.
    """
    a = as_complex_matrix(c)
    s = _counts(s, a.shape[0], "s")
    t = _counts(t, a.shape[1], "t")
    if s.sum() != t.sum():
        raise InputError(f"total counts differ: sum(s)={s.sum()} != sum(t)={t.sum()}")
    rows = np.repeat(np.arange(a.shape[0]), s)
    cols = np.repeat(np.arange(a.shape[1]), t)
    return a[np.ix_(rows, cols)]


def _binom_table(n):
    table = np.zeros((n + 1, n + 1), dtype=np.int64)
    for i in range(n + 1):
        for j in range(i + 1):
            table[i, j] = math.comb(i, j)
    return table


def permanent_repeated(c, s, t, *, backend=None, full_output=False):
    """``Per`` of ``submatrix_repeat(c, s, t)`` without building it.

    Candidates are Glynn's sum grouped by row or by column multiplicity
    (``prod(s_i + 1)`` terms instead of ``2^(n-1)``) and a dynamic program
    over column copies in use, which never subtracts and so wins on sparse
    inputs. Affordable candidates run cheapest first until the a-posteriori
    error bound drops below ``REPEATED_TARGET_BOUND`` relative; the value
    with the smallest bound is kept. ``full_output`` returns
    ``(value, bound)``.
    """
    a = as_complex_matrix(c)
    s = _counts(s, a.shape[0], "s")
    t = _counts(t, a.shape[1], "t")
    n = int(s.sum())
    if n != t.sum():
        raise InputError(f"total counts differ: sum(s)={n} != sum(t)={t.sum()}")
    a = a[np.ix_(s > 0, t > 0)]
    s, t = s[s > 0], t[t > 0]
    if n == 0:
        return (1.0 + 0j, 0.0) if full_output else 1.0 + 0j
    kern = kernels.get_backend(backend)
    eps = n * np.finfo(float).eps
    binom = _binom_table(int(max(s.max(), t.max())))

    def glynn(mat, rs, cs):
        val, absum = kern.permanent_grouped(mat, rs, cs, binom)
        return complex(val) / 2.0**n, eps * absum / 2.0**n

    def dp(mat, rs, cs):
        val, absval = kern.repeated_dp(mat, rs, cs)
        return complex(val), eps * absval

    # (cost estimate, evaluator, arguments); the dp runs on the side with
    # fewer states
    dp_side = (a, s, t) if np.prod(t + 1.0) <= np.prod(s + 1.0) else (a.T, t, s)
    dp_states = np.prod(dp_side[2] + 1.0)
    cands = [
        (np.prod(s + 1.0) * a.shape[1] / 2, glynn, (a, s, t)),
        (np.prod(t + 1.0) * a.shape[0] / 2, glynn, (a.T, t, s)),
    ]
    if dp_states <= REPEATED_DP_MAX_STATES:
        cands.append((dp_states * dp_side[0].shape[1], dp, dp_side))
    cands.sort(key=lambda cd: cd[0])
    cheap = cands[0][0]
    if cheap > REPEATED_MAX_TERMS:
        raise InputError(f"repeated permanent needs {cheap:.3g} term evaluations, cap {REPEATED_MAX_TERMS:.3g}")
    best = None
    for cost, fn, args in cands:
        if cost > max(16.0 * cheap, 2.0**20):
            break
        cand = fn(*args)
        if best is None or cand[1] < best[1]:
            best = cand
        if best[1] <= REPEATED_TARGET_BOUND * abs(best[0]):
            break
    return best if full_output else best[0]
