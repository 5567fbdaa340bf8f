"""Hot numeric kernels with two interchangeable backends.

The numba backend is used by default. Setting ``BIPGBS_KERNELS=numpy`` in the
environment before import selects the pure-numpy fallback; the same is done
automatically when numba cannot be imported. Both backends expose the same
functions with identical signatures:

``permanent(a)``
    Glynn's formula in Gray-code order for a square complex matrix.
``permanent_grouped(b, s, t, binom)``
    Unnormalised Glynn sum for ``b`` with rows repeated ``s_i`` times and
    columns ``t_j`` times, grouped by row multiplicity. Returns
    ``(sum, sum of |terms|)``; divide both by ``2^sum(s)``. ``binom`` is a
    table of binomial coefficients covering ``max(s)``.
``repeated_dp(b, s, t)``
    The same permanent by dynamic programming over how many copies of each
    column are in use. Returns ``(value, Per(|b|) with the same repeats)``;
    only real permutation terms are summed, so the error is bounded by
    ``n eps`` times the second number.
``jacobi_svd(a, tol, max_sweeps)``
    One-sided (Hestenes) Jacobi orthogonalisation of the columns of ``a``.
    Returns ``(a_rot, v, sweeps)`` with ``a @ v == a_rot``, the columns of
    ``a_rot`` mutually orthogonal, and ``sweeps == -1`` on non-convergence.
"""

import os
from types import ModuleType

from . import _numpy

ENV_VAR = "BIPGBS_KERNELS"

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None


def available_backends():
    names = ["numpy"]
    if _numba is not None:
        names.insert(0, "numba")
    return names


def get_backend(name=None) -> ModuleType:
    """Return the kernel module for ``name`` (default: from the environment)."""
    if name is None:
        name = os.environ.get(ENV_VAR, "numba").strip().lower() or "numba"
    if name == "numba":
        if _numba is None:
            return _numpy
        return _numba
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown kernel backend {name!r}; expected 'numba' or 'numpy'")


def backend_name(name=None) -> str:
    return get_backend(name).NAME
