"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly with ``python3 tests/test_acceptance.py`` or through pytest.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from bipgbs import ensemble_mc as em
from bipgbs import gbs_encoding as ge
from bipgbs import matrix_core as mc
from bipgbs import repetition_reduction as rr
from bipgbs import wishart_bounds as wb

if __package__:
    from .conftest import random_complex, record_acceptance
else:  # pragma: no cover - script mode
    sys.path.insert(0, __file__.rsplit("/", 1)[0])
    from conftest import random_complex, record_acceptance

_SUITE_START = time.time()


def _finish(number, ok, detail, elapsed, budget):
    in_time = elapsed < budget
    passed = bool(ok and in_time)
    record_acceptance(number, passed, f"{detail}; {elapsed:.1f} s (budget {budget} s)")
    assert ok, detail
    assert in_time, f"runtime {elapsed:.1f} s exceeds {budget} s"


def test_criterion_01_hafnian_permanent_identity():
    t0 = time.time()
    gen = np.random.default_rng(101)
    worst = 0.0
    for i in range(100):
        n = 1 + i % 4
        c = random_complex(gen, (n, n))
        block = np.block([[np.zeros((n, n)), c], [c.T, np.zeros((n, n))]])
        per = mc.permanent(c)
        worst = max(worst, abs(mc.hafnian_naive(block) - per) / abs(per))
    _finish(1, worst <= 1e-9, f"max rel err {worst:.2e} over 100 matrices", time.time() - t0, 10)


def test_criterion_02_distribution_normalisation():
    t0 = time.time()
    gen = np.random.default_rng(202)
    worst = 0.0
    for i in range(50):
        m = 1 + i % 3
        c = random_complex(gen, (m, m))
        c *= gen.uniform(0.05, 0.6) / mc.svd(c).sigma[0]
        tm = ge.encode(c)
        dist = ge.pair_number_distribution(tm, 4)
        for n in range(5):
            worst = max(worst, abs(ge.exact_sector_mass(tm, n) - dist[n]))
    _finish(2, worst <= 1e-9, f"max abs err {worst:.2e} over 50 programs, n <= 4", time.time() - t0, 60)


def test_criterion_03_click_statistics():
    t0 = time.time()
    lines, ok = [], True
    for m in (16, 32, 64):
        for mu in (0.1, 0.25):
            rep = em.run_click_experiment(m, mu, 500, seed=7, threads=0)
            z = {
                "mean_d": (rep.mean_d - rep.theory_mean_d) / rep.standard_error("mean_d"),
                "var_d": (rep.var_d - rep.theory_var_d) / rep.standard_error("var_d"),
                "var_sum": (rep.var_sum - rep.theory_var_sum) / rep.standard_error("var_sum"),
            }
            ok &= all(abs(v) <= 3 for v in z.values())
            lines.append(f"m={m} mu={mu}: " + " ".join(f"{k} {v:+.1f}SE" for k, v in z.items()))
    for line in lines:
        print("  ", line)
    _finish(3, ok, "deviations in standard errors: " + "; ".join(lines), time.time() - t0, 300)


def test_criterion_04_z_calibration():
    t0 = time.time()
    ok, worst = True, 0.0
    for m in (100, 200, 300):
        for alpha in (3.0, 2 * m**0.25):
            cal = wb.z_calibration(m, alpha, 50, seed=4)
            ratio = abs(cal.mean_logZ_sampled - cal.logZ_formula) / cal.sd_logZ
            worst = max(worst, ratio)
            ok &= ratio <= 1.0
    _finish(4, ok, f"max |mean - formula| / sd = {worst:.3f}", time.time() - t0, 300)


def test_criterion_05_i_ratio_slope():
    t0 = time.time()
    ms = np.unique(np.round(np.logspace(4, 5, 20)).astype(int))
    slopes = {a: wb.loglog_slope(ms, [wb.i_ratio_point(m, a).log_i for m in ms]) for a in (3.0, 4.0)}
    ok = all(abs(s - 1.5) <= 0.02 for s in slopes.values())
    detail = ", ".join(f"alpha={a:g} slope {s:.5f}" for a, s in slopes.items())
    _finish(5, ok, detail, time.time() - t0, 60)


def test_criterion_06_wishart_moments():
    t0 = time.time()
    ok, worst = True, 0.0
    for m in (20, 50):
        for alpha in (3.0, 6.0):
            eig = np.array([wb.sample_wishart(m, alpha, mc.RngStream(6, i)).eigenvalues for i in range(2000)])
            tr = eig.sum(axis=1)
            checks = [((eig**k).sum(axis=1), wb.wishart_trace_moment(m, alpha, k)) for k in (1, 2, 3)]
            e1, e2, eexp = wb.trace_moments_lemma(m, alpha)
            checks += [(tr, e1), (tr**2, e2), (np.exp(tr), eexp)]
            for sample, exact in checks:
                z = abs(sample.mean() - exact) / (sample.std(ddof=1) / math.sqrt(len(sample)))
                worst = max(worst, z)
                ok &= z <= 3
    _finish(6, ok, f"worst deviation {worst:.2f} SE over 24 checks", time.time() - t0, 120)


def test_criterion_07_tail_bounds():
    t0 = time.time()
    ok, parts = True, []
    for m, alpha, delta in ((100, 6.0, 0.1), (200, 8.0, 0.05), (50, 7.0, 0.2)):
        rep = em.validate_tail_bounds(m, alpha, delta, 1000, seed=17, threads=0)
        held = rep.holds()
        ok &= all(held.values())
        parts.append(f"({m},{alpha:g},{delta:g}) freqs {rep.freq_lambda_max:.3f}/{rep.freq_mean_pairs:.3f}/"
                     f"{rep.freq_pairs:.3f}/{rep.freq_z:.3f}")
    _finish(7, ok, "; ".join(parts), time.time() - t0, 300)


def test_criterion_08_thermal_identity():
    t0 = time.time()
    _, mean2, se = em.thermal_moments(0.5, 100_000, mc.RngStream(8))
    z = abs(mean2 - 3.0) / se
    _finish(8, z <= 5, f"<n^2> = {mean2:.4f} +- {se:.4f} ({z:.2f} SE)", time.time() - t0, 5)


def test_criterion_09_embedding():
    t0 = time.time()
    gen = np.random.default_rng(909)
    worst_const, worst_lead, count = 0.0, 0.0, 0
    for c in range(1, 5):
        a = random_complex(gen, (c, c))
        per_a = mc.permanent(a)
        for s in itertools.product((1, 2, 3), repeat=c):
            for t in itertools.product((1, 2, 3), repeat=c):
                x, y = rr.sample_variables(c, s, t, gen)
                emb = rr.build_embedding(a, s, t, x, y)
                ref = emb.xi * per_a
                worst_const = max(worst_const, abs(emb.permanent(0.0) - ref) / abs(ref))
                npts = emb.k + 2
                nodes = np.exp(2j * np.pi * np.arange(npts) / npts)
                coef = np.fft.fft([emb.permanent(z) for z in nodes]) / npts
                worst_lead = max(worst_lead, abs(coef[-1]) / np.abs(coef).max())
                count += 1
    ok = worst_const <= 1e-9 and worst_lead <= 1e-8
    _finish(9, ok, f"{count} patterns: const rel err {worst_const:.1e}, leading coef {worst_lead:.1e}",
            time.time() - t0, 60)


def test_criterion_10_recovery():
    t0 = time.time()
    gen = np.random.default_rng(1010)
    worst, count = 0.0, 0
    for c in range(1, 6):
        for _ in range(4):
            a = random_complex(gen, (c, c))
            while True:
                s = gen.integers(1, 4, c)
                t = gen.integers(1, 4, c)
                if s.sum() + t.sum() - 2 * c <= 4:
                    break
            res = rr.recover_permanent(a, s.tolist(), t.tolist(), mc.permanent, gen)
            worst = max(worst, abs(res - mc.permanent(a)) / abs(mc.permanent(a)))
            count += 1
    worst2 = 0.0
    for s, t in (((1, 1), (1, 1)), ((2, 1), (1, 1)), ((1, 1), (1, 2)), ((2, 1), (1, 2)), ((3, 1), (1, 1))):
        a = random_complex(gen, (2, 2))
        val = rr.recover_permanent_abs2(a, s, t, lambda mm: abs(mc.permanent(mm)) ** 2, 0.3, gen)
        worst2 = max(worst2, abs(val - abs(mc.permanent(a)) ** 2) / abs(mc.permanent(a)) ** 2)
    eps, noise_ok = 1e-4, True
    for _ in range(10):
        a = random_complex(gen, (3, 3))

        def oracle(mm):
            return mc.permanent(mm) + eps * np.exp(2j * np.pi * gen.uniform())

        res = rr.recover_permanent(a, (2, 1, 2), (1, 2, 1), oracle, gen, full_output=True)
        noise_ok &= abs(res.value - mc.permanent(a)) <= eps / abs(res.xi) * (1 + 1e-9)
    ok = worst <= 1e-8 and worst2 <= 0.01 and noise_ok
    _finish(10, ok, f"exact {worst:.1e} ({count} cases), abs2 {worst2:.1e}, noise bound held {noise_ok}",
            time.time() - t0, 120)


def test_criterion_11_second_moment():
    t0 = time.time()
    ok, parts = True, []
    for i, (s, t) in enumerate((((1, 1, 1), (1, 1, 1)), ((2,), (2,)), ((2, 1), (1, 2)))):
        mean, se = rr.repeated_permanent_second_moment(s, t, 100_000, mc.RngStream(11, i))
        exact = math.exp(rr.expected_repeated_permanent(s, t))
        z = abs(mean - exact) / se
        ok &= z <= 3
        parts.append(f"s={s} t={t}: {mean:.3f} vs {exact:g} ({z:.2f} SE)")
    _finish(11, ok, "; ".join(parts), time.time() - t0, 120)


def test_criterion_12_xi_statistics():
    t0 = time.time()
    xs = rr.xi_statistics(100, 100_000, mc.RngStream(12))
    mean_ref, var_ref = -np.euler_gamma / 2, math.pi**2 / 24
    rel_m = abs(xs.mean_log_factor / mean_ref - 1)
    rel_v = abs(xs.var_log_factor / var_ref - 1)
    ok = xs.freq_x >= 0.1 and rel_m <= 0.05 and rel_v <= 0.05
    detail = f"Pr[X >= 0.7493^100] = {xs.freq_x:.3f}, mean off {rel_m:.2%}, var off {rel_v:.2%}"
    _finish(12, ok, detail, time.time() - t0, 60)


def test_criterion_13_performance():
    a = random_complex(np.random.default_rng(13), (20, 20))
    mc.permanent(a[:2, :2])
    t0 = time.time()
    mc.permanent(a)
    perm_time = time.time() - t0
    suite = time.time() - _SUITE_START
    ok = perm_time < 5 and suite < 1800
    record_acceptance(13, ok, f"n=20 permanent {perm_time:.3f} s (budget 5 s); acceptance suite {suite:.1f} s (budget 1800 s)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
