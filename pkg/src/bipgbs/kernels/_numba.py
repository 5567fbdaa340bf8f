import math

import numba as nb
import numpy as np

NAME = "numba"


@nb.njit(cache=True, nogil=True)
def _glynn(a):
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return a[0, 0]
    colsum = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            colsum[j] += a[i, j]
    prod = 1.0 + 0.0j
    for j in range(n):
        prod *= colsum[j]
    total = prod
    sign = 1.0
    ncfg = 1 << (n - 1)
    for k in range(1, ncfg):
        # index of the bit that changes between gray(k-1) and gray(k)
        idx = 0
        kk = k
        while (kk & 1) == 0:
            kk >>= 1
            idx += 1
        row = idx + 1
        gray = k ^ (k >> 1)
        if (gray >> idx) & 1:
            for j in range(n):
                colsum[j] -= 2.0 * a[row, j]
        else:
            for j in range(n):
                colsum[j] += 2.0 * a[row, j]
        sign = -sign
        prod = 1.0 + 0.0j
        for j in range(n):
            prod *= colsum[j]
        total += sign * prod
    return total / ncfg


def permanent(a):
    return _glynn(np.ascontiguousarray(a, dtype=np.complex128))


@nb.njit(cache=True, nogil=True)
def _glynn_grouped(b, s, t, binom):
    # Glynn's sum over sign vectors grouped by how many copies of each row
    # are negated; k walks a reflected mixed-radix Gray code. Terms at k and
    # s - k coincide, so a row with s_i = 1 is pinned at k_i = 0 and doubled.
    r, q = b.shape
    top = s.copy()
    factor = 1.0
    for i in range(r):
        if s[i] == 1:
            top[i] = 0
            factor = 2.0
            break
    k = np.zeros(r, dtype=np.int64)
    d = np.ones(r, dtype=np.int64)
    coef = np.zeros(q, dtype=np.complex128)
    for i in range(r):
        for j in range(q):
            coef[j] += s[i] * b[i, j]
    nterms = 1
    for i in range(r):
        nterms *= top[i] + 1
    total = 0.0 + 0.0j
    abssum = 0.0
    sign = 1.0
    w = 1
    for step in range(nterms):
        if step > 0:
            i = 0
            while k[i] + d[i] < 0 or k[i] + d[i] > top[i]:
                d[i] = -d[i]
                i += 1
            w //= binom[s[i], k[i]]
            k[i] += d[i]
            w *= binom[s[i], k[i]]
            for j in range(q):
                coef[j] -= 2.0 * d[i] * b[i, j]
            sign = -sign
        prod = 1.0 + 0.0j
        for j in range(q):
            for _ in range(t[j]):
                prod *= coef[j]
        total += (sign * w) * prod
        abssum += w * abs(prod)
    return factor * total, factor * abssum


@nb.njit(cache=True, nogil=True)
def _repeated_dp(b, s, t):
    # dp over how many copies of each column are taken by the first rows;
    # states are mixed-radix indices, so successors always have larger index
    r, q = b.shape
    stride = np.ones(q, dtype=np.int64)
    for j in range(1, q):
        stride[j] = stride[j - 1] * (t[j - 1] + 1)
    nstates = stride[q - 1] * (t[q - 1] + 1)
    rowseq = np.empty(s.sum(), dtype=np.int64)
    pos = 0
    for i in range(r):
        for _ in range(s[i]):
            rowseq[pos] = i
            pos += 1
    n = pos
    babs = np.abs(b)
    dp = np.zeros(nstates, dtype=np.complex128)
    dpa = np.zeros(nstates)
    dp[0] = 1.0
    dpa[0] = 1.0
    used = np.zeros(q, dtype=np.int64)
    level = 0
    for st in range(nstates):
        if st > 0:
            j = 0
            while used[j] == t[j]:
                level -= used[j]
                used[j] = 0
                j += 1
            used[j] += 1
            level += 1
        if level >= n or dpa[st] == 0.0:
            continue
        row = rowseq[level]
        v = dp[st]
        va = dpa[st]
        for j in range(q):
            free = t[j] - used[j]
            if free > 0:
                dp[st + stride[j]] += v * b[row, j] * free
                dpa[st + stride[j]] += va * babs[row, j] * free
    return dp[nstates - 1], dpa[nstates - 1]


def repeated_dp(b, s, t):
    return _repeated_dp(
        np.ascontiguousarray(b, dtype=np.complex128),
        np.ascontiguousarray(s, dtype=np.int64),
        np.ascontiguousarray(t, dtype=np.int64),
    )


def permanent_grouped(b, s, t, binom):
    return _glynn_grouped(
        np.ascontiguousarray(b, dtype=np.complex128),
        np.ascontiguousarray(s, dtype=np.int64),
        np.ascontiguousarray(t, dtype=np.int64),
        np.ascontiguousarray(binom, dtype=np.int64),
    )


@nb.njit(cache=True, nogil=True)
def _rotate(mat, p, q, c, s, phc):
    for i in range(mat.shape[0]):
        xp = mat[i, p]
        xq = mat[i, q] * phc
        mat[i, p] = c * xp - s * xq
        mat[i, q] = s * xp + c * xq


@nb.njit(cache=True, nogil=True)
def _jacobi(a, tol, max_sweeps):
    rows, n = a.shape
    v = np.eye(n, dtype=np.complex128)
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0 + 0.0j
                for i in range(rows):
                    x = a[i, p]
                    y = a[i, q]
                    alpha += x.real * x.real + x.imag * x.imag
                    beta += y.real * y.real + y.imag * y.imag
                    gamma += x.conjugate() * y
                g = abs(gamma)
                if g == 0.0 or alpha < 1e-300 or beta < 1e-300:
                    continue
                if g <= tol * math.sqrt(alpha * beta):
                    continue
                rotated = True
                phc = (gamma / g).conjugate()
                zeta = (beta - alpha) / (2.0 * g)
                sgn = 1.0 if zeta >= 0.0 else -1.0
                t = sgn / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                _rotate(a, p, q, c, s, phc)
                _rotate(v, p, q, c, s, phc)
        if not rotated:
            return a, v, sweep + 1
    return a, v, -1


def jacobi_svd(a, tol=1e-12, max_sweeps=100):
    work = np.array(a, dtype=np.complex128, order="C", copy=True)
    return _jacobi(work, float(tol), int(max_sweeps))
