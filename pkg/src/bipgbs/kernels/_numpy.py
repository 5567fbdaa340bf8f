import numpy as np

NAME = "numpy"

# rows of +-1 sign vectors processed per block
_BLOCK_BITS = 13


def permanent(a):
    a = np.ascontiguousarray(a, dtype=np.complex128)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n == 1:
        return complex(a[0, 0])
    nfree = n - 1
    ncfg = 1 << nfree
    block = 1 << min(_BLOCK_BITS, nfree)
    shifts = np.arange(nfree, dtype=np.int64)
    base = a[0]
    rest = a[1:]
    total = 0.0 + 0.0j
    for start in range(0, ncfg, block):
        k = np.arange(start, start + block, dtype=np.int64)
        bits = (k[:, None] >> shifts) & 1
        delta = 1.0 - 2.0 * bits
        sign = np.where(bits.sum(axis=1) & 1, -1.0, 1.0)
        colsum = base + delta @ rest
        total += np.dot(sign, np.prod(colsum, axis=1))
    return complex(total / ncfg)


def permanent_grouped(b, s, t, binom):
    b = np.asarray(b, dtype=np.complex128)
    s = np.asarray(s, dtype=np.int64)
    t = np.asarray(t, dtype=np.int64)
    # every (k_1, ..., k_r) with 0 <= k_i <= s_i, enumerated in blocks
    radices = s + 1
    nterms = int(np.prod(radices))
    total, abssum = 0.0 + 0.0j, 0.0
    block = 1 << _BLOCK_BITS
    for start in range(0, nterms, block):
        idx = np.arange(start, min(start + block, nterms), dtype=np.int64)
        k = np.empty((idx.size, s.size), dtype=np.int64)
        rem = idx
        for i in range(s.size):
            k[:, i] = rem % radices[i]
            rem = rem // radices[i]
        w = np.prod(binom[s, k], axis=1).astype(float)
        sign = np.where(k.sum(axis=1) & 1, -1.0, 1.0)
        prod = np.prod(((s - 2 * k) @ b) ** t, axis=1)
        total += np.dot(sign * w, prod)
        abssum += float(np.dot(w, np.abs(prod)))
    return complex(total), abssum


def _round_robin(n):
    """Disjoint (p, q) pairings covering every pair once per sweep."""
    m = n + (n & 1)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                pairs.append((min(p, q), max(p, q)))
        if pairs:
            rounds.append(np.array(pairs, dtype=np.int64).T)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_svd(a, tol=1e-12, max_sweeps=100):
    a = np.array(a, dtype=np.complex128, copy=True)
    n = a.shape[1]
    v = np.eye(n, dtype=np.complex128)
    rounds = _round_robin(n)
    for sweep in range(max_sweeps):
        rotated = False
        for p, q in rounds:
            ap, aq = a[:, p], a[:, q]
            alpha = np.einsum("ij,ij->j", ap.conj(), ap).real
            beta = np.einsum("ij,ij->j", aq.conj(), aq).real
            gamma = np.einsum("ij,ij->j", ap.conj(), aq)
            g = np.abs(gamma)
            act = (g > 0) & (alpha >= 1e-300) & (beta >= 1e-300)
            act &= g > tol * np.sqrt(alpha * beta)
            if not act.any():
                continue
            rotated = True
            p, q = p[act], q[act]
            g, gamma = g[act], gamma[act]
            phc = np.conj(gamma / g)
            zeta = (beta[act] - alpha[act]) / (2.0 * g)
            sgn = np.where(zeta >= 0.0, 1.0, -1.0)
            t = sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            for mat in (a, v):
                xp = mat[:, p]
                xq = mat[:, q] * phc
                mat[:, p] = c * xp - s * xq
                mat[:, q] = s * xp + c * xq
        if not rotated:
            return a, v, sweep + 1
    return a, v, -1


def repeated_dp(b, s, t):
    b = np.asarray(b, dtype=np.complex128)
    t = np.asarray(t, dtype=np.int64)
    q = t.size
    radices = t + 1
    stride = np.concatenate([[1], np.cumprod(radices[:-1])]).astype(np.int64)
    nstates = int(np.prod(radices))
    idx = np.arange(nstates, dtype=np.int64)
    used = (idx[:, None] // stride) % radices
    level = used.sum(axis=1)
    free = t - used
    rowseq = np.repeat(np.arange(b.shape[0]), np.asarray(s, dtype=np.int64))
    dp = np.zeros(nstates, dtype=np.complex128)
    dpa = np.zeros(nstates)
    dp[0] = dpa[0] = 1.0
    for lev, row in enumerate(rowseq):
        at = idx[level == lev]
        for j in range(q):
            src = at[free[at, j] > 0]
            mult = free[src, j]
            dp[src + stride[j]] += dp[src] * b[row, j] * mult
            dpa[src + stride[j]] += dpa[src] * abs(b[row, j]) * mult
    return complex(dp[-1]), float(dpa[-1])
