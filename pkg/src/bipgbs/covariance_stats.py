"""Click statistics of bipartite GBS programs.

Exact per-program moments come from the X, Y, W blocks of the Husimi
covariance matrix, using closed forms for one- and two-mode vacuum
probabilities. Ensemble predictions (averaged over Gaussian transition
matrices at photon density ``mu``) are closed-form expressions in ``m`` and
``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvalidStateError
from .gbs_encoding import TransitionMatrix


@dataclass(frozen=True)
class HusimiBlocks:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray

    @property
    def m(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class ClickMoments:
    """Mean and (co)variance of the click counts ``d`` and ``e`` of the two halves."""

    mean_d: float
    mean_e: float
    var_d: float
    var_e: float
    cov_de: float
    var_sum: float

    @property
    def corr(self) -> float:
        den = math.sqrt(self.var_d * self.var_e)
        return self.cov_de / den if den > 0 else math.nan


def husimi_blocks(tm: TransitionMatrix) -> HusimiBlocks:
    sig = tm.sigma
    inv = 1.0 / ((1.0 - sig) * (1.0 + sig))
    u, v = tm.svd.u, tm.svd.v
    x = (u * inv) @ u.conj().T
    y = (v * inv) @ v.conj().T
    w = (u * (sig * inv)) @ v.T
    return HusimiBlocks(x, y, w)


def _pair_term(da, db, off_abs2, same_half):
    """sum over pairs of 1/(a_i b_j - |o_ij|^2) - 1/(a_i b_j), diagonal excluded if same_half."""
    prod = np.outer(da, db)
    det = prod - off_abs2
    if same_half:
        np.fill_diagonal(det, 1.0)
        np.fill_diagonal(prod, 1.0)
    if np.any(det <= 0.0):
        raise InvalidStateError("two-mode vacuum probability is not positive")
    return float(np.sum(1.0 / det - 1.0 / prod))


def click_moments_exact(hb: HusimiBlocks) -> ClickMoments:
    dx = np.real(np.diag(hb.x))
    dy = np.real(np.diag(hb.y))
    if np.any(dx < 1.0 - 1e-9) or np.any(dy < 1.0 - 1e-9):
        raise InvalidStateError("Husimi block diagonal below 1")
    m = hb.m
    px = 1.0 / dx
    py = 1.0 / dy
    mean_d = float(m - px.sum())
    mean_e = float(m - py.sum())
    var_d = float(np.sum(px * (1.0 - px))) + _pair_term(dx, dx, np.abs(hb.x) ** 2, True)
    var_e = float(np.sum(py * (1.0 - py))) + _pair_term(dy, dy, np.abs(hb.y) ** 2, True)
    cov_de = _pair_term(dx, dy, np.abs(hb.w) ** 2, False)
    return ClickMoments(mean_d, mean_e, var_d, var_e, cov_de, var_d + var_e + 2.0 * cov_de)


def _check_mu(mu):
    if not 0.0 < mu < 1.0:
        raise InputError("photon density mu must lie in (0, 1)")


def analytic_click_mean(m, mu) -> float:
    """Ensemble mean of the clicks in one half, ``m mu / (1 + mu)``."""
    _check_mu(mu)
    return m * mu / (1.0 + mu)


def analytic_click_variances(m, mu):
    """Ensemble predictions ``(var_d, var_sum, cov_de, corr)`` at density ``mu``."""
    _check_mu(mu)
    q = 1.0 - mu * mu + mu
    var_d = m * mu * q / ((1.0 - mu) * (1.0 + mu) ** 3)
    var_sum = 2.0 * m * (2.0 - mu) * mu / ((1.0 - mu) * (1.0 + mu) ** 2)
    cov_de = var_d / q
    return var_d, var_sum, cov_de, 1.0 / q


def alpha_of_mu(mu) -> float:
    """Scale ``alpha`` at which the Gaussian ensemble has photon density ``mu``."""
    if not mu > 0:
        raise InputError("mu must be positive")
    return (1.0 + mu) / math.sqrt(mu)


def quarter_circle_pdf(sigma, alpha):
    """Limiting singular-value density ``(alpha/pi) sqrt(4 - alpha^2 sigma^2)`` on ``[0, 2/alpha]``."""
    if not alpha > 0:
        raise InputError("alpha must be positive")
    s = np.asarray(sigma, dtype=float)
    inside = (s >= 0.0) & (s <= 2.0 / alpha)
    val = np.where(inside, alpha / math.pi * np.sqrt(np.clip(4.0 - (alpha * s) ** 2, 0.0, None)), 0.0)
    return float(val) if val.ndim == 0 else val


def frobenius_expectations(m, mu):
    """Ensemble expectations of ``(|X|_F^2, |Y|_F^2, |W|_F^2)`` at density ``mu``."""
    _check_mu(mu)
    xx = m * (1.0 + mu) / (1.0 - mu)
    return xx, xx, m * mu * (1.0 + mu) / (1.0 - mu)
