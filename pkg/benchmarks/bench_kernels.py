"""Compare the numba and numpy simulation kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (so numba compile time is excluded), results
of the two backends are checked for equality, then the best of ``--repeat``
timings is reported.
"""
import argparse
import time

import numpy as np

from revlogic import kernels
from revlogic.arith import gen_rbca, gen_vadder
from revlogic.simulator import random_circuit


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    yield "packed", "random w=12, 2000 gates, all 4096 patterns", random_circuit(rng, 12, 2000), np.arange(1 << 12, dtype=np.uint64)
    c, _ = gen_vadder(16)
    yield "packed", "vadder(16), 2^18 samples", c, rng.integers(0, 1 << c.width, 1 << 18, dtype=np.uint64)
    c, _ = gen_vadder(64)
    yield "sliced", "vadder(64), 2^16 samples", c, rng.integers(0, 1 << 63, (c.width, 1 << 10), dtype=np.uint64)
    c, _ = gen_rbca(256, 16)
    yield "sliced", "rbca(256, 16), 2^14 samples", c, rng.integers(0, 1 << 63, (c.width, 1 << 8), dtype=np.uint64)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if kernels.numba is None:
        raise SystemExit("numba is not importable, nothing to compare")

    rng = np.random.default_rng(args.seed)
    print(f"{'layout':7s} {'case':44s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for layout, label, circ, data in cases(rng):
        fn = kernels.run_packed if layout == "packed" else kernels.run_sliced
        ref = fn(circ, data, use_numba=False)
        assert np.array_equal(ref, fn(circ, data, use_numba=True)), label
        t_np = best_of(lambda: fn(circ, data, use_numba=False), args.repeat)
        t_nb = best_of(lambda: fn(circ, data, use_numba=True), args.repeat)
        print(f"{layout:7s} {label:44s} {t_np * 1e3:8.2f}ms {t_nb * 1e3:8.2f}ms {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
