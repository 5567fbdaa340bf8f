"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is called once first so numba compilation is not timed.
"""

import argparse
import time

import numpy as np

from bipgbs import kernels, matrix_core as mc


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(gen):
    for n in (12, 16, 20):
        a = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        yield f"permanent n={n}", lambda k, a=a: k.permanent(a)
    b = gen.standard_normal((12, 12)) + 1j * gen.standard_normal((12, 12))
    s = np.array([3, 3, 3, 3] + [1] * 8)
    yield "repeated permanent 12x12 s=t=(3^4,1^8)", lambda k, b=b, s=s: mc.permanent_repeated(b, s, s, backend=k.NAME)
    for n in (64, 256):
        a = gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))
        yield f"jacobi_svd n={n}", lambda k, a=a: k.jacobi_svd(a, 1e-12, 100)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    names = kernels.available_backends()
    print(f"{'case':42s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, fn in cases(np.random.default_rng(0)):
        times = [best_of(lambda: fn(kernels.get_backend(n)), args.repeat) for n in names]
        speed = f"{times[-1] / times[0]:10.1f}x" if len(times) > 1 else ""
        print(f"{label:42s}" + "".join(f"{t:11.4f}s" for t in times) + speed)


if __name__ == "__main__":
    main()
