import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bipgbs import matrix_core as mc
from bipgbs.errors import InputError

from .conftest import random_complex

seeds = st.integers(0, 2**32 - 1)


def _brute_permanent(a):
    n = a.shape[0]
    return sum(math.prod(a[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


class TestPermanent:
    def test_identity(self):
        assert mc.permanent(np.eye(3)) == pytest.approx(1.0)

    def test_all_ones(self):
        assert mc.permanent(np.ones((3, 3))) == pytest.approx(6.0)

    def test_two_by_two(self):
        assert mc.permanent([[1, 2], [3, 4]]) == pytest.approx(10.0)

    def test_empty_matrix(self):
        assert mc.permanent(np.zeros((0, 0))) == 1.0

    def test_rejects_rectangular(self):
        with pytest.raises(InputError):
            mc.permanent(np.ones((2, 3)))

    def test_size_cap(self):
        with pytest.raises(InputError):
            mc.permanent(np.ones((31, 31)))

    def test_naive_examples(self):
        assert mc.permanent_naive(np.eye(2)) == 1.0
        assert mc.permanent_naive([[0, 1], [1, 0]]) == 1.0
        with pytest.raises(InputError):
            mc.permanent_naive(np.eye(10))

    def test_naive_matches_glynn_5x5(self, rng):
        a = random_complex(rng, (5, 5))
        assert abs(mc.permanent_naive(a) - mc.permanent(a)) <= 1e-9 * abs(mc.permanent_naive(a))

    @given(seeds, st.integers(1, 6))
    def test_matches_naive(self, seed, n):
        a = random_complex(np.random.default_rng(seed), (n, n))
        ref = _brute_permanent(a)
        assert abs(mc.permanent(a) - ref) <= 1e-9 * max(1.0, abs(ref))

    @given(seeds, st.integers(1, 6), st.integers(0, 5))
    def test_row_multilinear(self, seed, n, row):
        gen = np.random.default_rng(seed)
        a = random_complex(gen, (n, n))
        lam = complex(*gen.standard_normal(2))
        b = a.copy()
        b[row % n] *= lam
        p = mc.permanent(a)
        assert abs(mc.permanent(b) - lam * p) <= 1e-9 * max(1.0, abs(lam * p))

    @given(seeds, st.integers(1, 7))
    def test_transpose_invariant(self, seed, n):
        a = random_complex(np.random.default_rng(seed), (n, n))
        p = mc.permanent(a)
        assert abs(mc.permanent(a.T) - p) <= 1e-9 * max(1.0, abs(p))

    @given(seeds, st.integers(1, 6))
    def test_row_permutation_invariant(self, seed, n):
        gen = np.random.default_rng(seed)
        a = random_complex(gen, (n, n))
        p = mc.permanent(a)
        assert abs(mc.permanent(a[gen.permutation(n)]) - p) <= 1e-9 * max(1.0, abs(p))


class TestHafnian:
    def test_two_by_two(self):
        assert mc.hafnian_naive([[0, 2.5], [2.5, 0]]) == 2.5

    def test_zero(self):
        assert mc.hafnian_naive(np.zeros((4, 4))) == 0

    def test_all_ones_counts_matchings(self):
        # (2n-1)!! perfect matchings of K_{2n}
        assert mc.hafnian_naive(np.ones((6, 6))) == pytest.approx(15.0)

    def test_rejects_odd_and_asymmetric(self):
        with pytest.raises(InputError):
            mc.hafnian_naive(np.ones((3, 3)))
        with pytest.raises(InputError):
            mc.hafnian_naive([[0, 1], [2, 0]])

    @given(seeds, st.integers(1, 4))
    def test_bipartite_block_is_permanent(self, seed, n):
        c = random_complex(np.random.default_rng(seed), (n, n))
        z = np.zeros((n, n))
        block = np.block([[z, c], [c.T, z]])
        p = mc.permanent(c)
        assert abs(mc.hafnian_naive(block) - p) <= 1e-9 * max(1.0, abs(p))


class TestGaussianSampling:
    def test_deterministic(self):
        a = mc.sample_gaussian_matrix(4, 5, 0.0, 1.0, mc.RngStream(7, 3))
        b = mc.sample_gaussian_matrix(4, 5, 0.0, 1.0, mc.RngStream(7, 3))
        assert np.array_equal(a, b)
        c = mc.sample_gaussian_matrix(4, 5, 0.0, 1.0, mc.RngStream(7, 4))
        assert not np.array_equal(a, c)

    def test_unit_variance_million(self):
        a = mc.sample_gaussian_matrix(1000, 1000, 0.0, 1.0, mc.RngStream(1))
        assert np.mean(np.abs(a) ** 2) == pytest.approx(1.0, abs=0.01)
        assert abs(a.mean()) < 0.01

    def test_real_imag_split(self):
        a = mc.sample_gaussian_matrix(500, 200, 0.0, 2.0, mc.RngStream(2))
        assert np.var(a.real) == pytest.approx(1.0, rel=0.02)
        assert np.var(a.imag) == pytest.approx(1.0, rel=0.02)
        assert abs(np.mean(a.real * a.imag)) < 0.02

    def test_ensemble_variance(self):
        m, alpha = 100, 3.0
        var = 1.0 / (alpha**2 * m)
        a = mc.sample_gaussian_matrix(1000, 100, 0.0, var, mc.RngStream(3))
        assert np.mean(np.abs(a) ** 2) == pytest.approx(var, rel=0.02)

    def test_complex_mean(self):
        a = mc.sample_gaussian_matrix(300, 300, 1 - 2j, 0.5, mc.RngStream(4))
        assert abs(a.mean() - (1 - 2j)) < 0.01
        assert np.mean(np.abs(a - (1 - 2j)) ** 2) == pytest.approx(0.5, rel=0.02)

    def test_rejects_bad_variance(self):
        with pytest.raises(InputError):
            mc.sample_gaussian_matrix(2, 2, 0.0, 0.0, mc.RngStream(0))

    def test_stream_validation(self):
        with pytest.raises(InputError):
            mc.RngStream(-1)
        with pytest.raises(InputError):
            mc.RngStream(0, 2**64)


def _check_svd(a, res):
    scale = max(1.0, np.linalg.norm(a))
    assert np.linalg.norm(res.reconstruct() - a) <= 1e-10 * scale
    n = a.shape[0]
    assert np.abs(res.u.conj().T @ res.u - np.eye(n)).max() <= 1e-10
    assert np.abs(res.v.conj().T @ res.v - np.eye(n)).max() <= 1e-10
    assert np.all(np.diff(res.sigma) <= 0)
    assert np.all(res.sigma >= 0)


class TestSvd:
    def test_diagonal(self):
        res = mc.svd(np.diag([2.0, 1.0]))
        assert np.allclose(res.sigma, [2, 1])
        assert np.allclose(np.abs(res.u), np.eye(2))
        assert np.allclose(np.abs(res.v), np.eye(2))

    def test_random_8x8(self, rng):
        a = random_complex(rng, (8, 8))
        res = mc.svd(a)
        _check_svd(a, res)
        assert np.allclose(res.sigma, np.linalg.svd(a, compute_uv=False), atol=1e-12)

    def test_rank_one(self):
        x = np.array([1.0, 2j, -3.0, 0.5])
        y = np.array([1j, 1.0, 2.0, -1.0])
        a = np.outer(x, y)
        res = mc.svd(a)
        _check_svd(a, res)
        assert res.sigma[0] == pytest.approx(np.linalg.norm(x) * np.linalg.norm(y))
        assert np.all(res.sigma[1:] < 1e-12)

    def test_zero_and_empty(self):
        res = mc.svd(np.zeros((3, 3)))
        _check_svd(np.zeros((3, 3)), res)
        assert mc.svd(np.zeros((0, 0))).sigma.size == 0

    def test_transpose_convention(self, rng):
        # C = U diag(sigma) V^T, so C^T C-bar ... v columns are conjugated right vectors
        a = random_complex(rng, (5, 5))
        res = mc.svd(a)
        assert np.allclose(a @ res.v.conj(), res.u * res.sigma)

    @given(seeds, st.integers(1, 12), st.sampled_from(["numba", "numpy"]))
    def test_invariants(self, seed, n, backend):
        gen = np.random.default_rng(seed)
        a = random_complex(gen, (n, n)) * 10.0 ** gen.uniform(-3, 3)
        _check_svd(a, mc.svd(a, backend=backend))

    @given(seeds, st.integers(2, 8), st.integers(1, 7))
    def test_rank_deficient(self, seed, n, r):
        gen = np.random.default_rng(seed)
        r = min(r, n - 1)
        a = random_complex(gen, (n, r)) @ random_complex(gen, (r, n))
        res = mc.svd(a)
        _check_svd(a, res)
        assert np.all(res.sigma[r:] <= 1e-10 * res.sigma[0])


class TestSubmatrixRepeat:
    c = np.arange(1, 10).reshape(3, 3).astype(complex)

    def test_figure_example(self):
        out = mc.submatrix_repeat(self.c, (2, 0, 1), (1, 2, 0))
        expected = self.c[np.ix_([0, 0, 2], [0, 1, 1])]
        assert np.array_equal(out, expected)

    def test_all_ones_identity(self):
        assert np.array_equal(mc.submatrix_repeat(self.c, (1, 1, 1), (1, 1, 1)), self.c)

    def test_minor(self):
        out = mc.submatrix_repeat(self.c, (1, 1, 0), (0, 1, 1))
        assert np.array_equal(out, self.c[np.ix_([0, 1], [1, 2])])

    def test_unequal_totals(self):
        with pytest.raises(InputError):
            mc.submatrix_repeat(self.c, (1, 1, 0), (0, 0, 1))

    @given(seeds, st.lists(st.integers(0, 2), min_size=3, max_size=3), st.data())
    def test_grouped_permutation_expansion(self, seed, s, data):
        # Per(C_{S,T}) equals the direct sum over permutations of the repeated index lists
        gen = np.random.default_rng(seed)
        c = gen.integers(-2, 3, size=(3, 3)).astype(complex)
        n = sum(s)
        t = data.draw(st.lists(st.integers(0, 2), min_size=3, max_size=3).filter(lambda v: sum(v) == n))
        rows = [i for i in range(3) for _ in range(s[i])]
        cols = [j for j in range(3) for _ in range(t[j])]
        direct = sum(math.prod(c[rows[i], cols[p[i]]] for i in range(n)) for p in itertools.permutations(range(n)))
        assert mc.permanent(mc.submatrix_repeat(c, s, t)) == pytest.approx(direct, abs=1e-9)


class TestMatrixJson:
    def test_round_trip(self, rng):
        a = random_complex(rng, (2, 3))
        assert np.array_equal(mc.matrix_from_json(mc.matrix_to_json(a)), a)

    def test_bad_shape(self):
        with pytest.raises(InputError):
            mc.matrix_from_json({"rows": 2, "cols": 2, "re": [1, 2, 3], "im": [0, 0, 0]})

    def test_non_finite(self):
        with pytest.raises(InputError):
            mc.as_complex_matrix([[np.nan]])


class TestPermanentRepeated:
    @given(seeds, st.integers(1, 4), st.data())
    def test_matches_dense(self, seed, r, data):
        gen = np.random.default_rng(seed)
        q = data.draw(st.integers(1, 4))
        s = data.draw(st.lists(st.integers(0, 3), min_size=r, max_size=r))
        t = data.draw(st.lists(st.integers(0, 3), min_size=q, max_size=q).filter(lambda v: sum(v) == sum(s)))
        c = random_complex(gen, (r, q))
        ref = mc.permanent(mc.submatrix_repeat(c, s, t))
        for backend in ("numba", "numpy"):
            val, bound = mc.permanent_repeated(c, s, t, backend=backend, full_output=True)
            assert abs(val - ref) <= 1e-10 * max(1.0, abs(ref))
            assert bound >= 0

    def test_empty(self):
        assert mc.permanent_repeated(np.ones((2, 2)), (0, 0), (0, 0)) == 1

    def test_binomial_count(self):
        # all-ones matrix: Per = n!
        assert mc.permanent_repeated(np.ones((1, 1)), (6,), (6,)).real == pytest.approx(720)
        assert mc.permanent_repeated(np.ones((2, 3)), (3, 2), (1, 2, 2)).real == pytest.approx(120)

    def test_large_repeat_cheap(self):
        # one 2x2 block repeated 15 times per mode: 30x30 dense but 256 states grouped
        c = np.array([[1.0, 0.5], [0.25, 1.0]], dtype=complex)
        val = mc.permanent_repeated(c, (15, 15), (15, 15))
        assert math.isfinite(abs(val))
        assert val.real == pytest.approx(sum(
            math.comb(15, j) ** 2 * math.factorial(15) ** 2 * 0.5**j * 0.25**j
            for j in range(16)), rel=1e-10)

    def test_sparse_accuracy(self):
        # upper triangular: Per = product of the diagonal, where Glynn cancels heavily
        gen = np.random.default_rng(4)
        c = np.triu(random_complex(gen, (12, 12)) * 10)
        ref = np.prod(np.diag(c))
        val, bound = mc.permanent_repeated(c, [1] * 12, [1] * 12, full_output=True)
        assert abs(val - ref) <= 1e-13 * abs(ref)
        assert abs(val - ref) <= bound

    def test_mismatch(self):
        with pytest.raises(InputError):
            mc.permanent_repeated(np.ones((2, 2)), (1, 1), (1, 0))
