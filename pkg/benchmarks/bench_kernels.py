"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per backend and the speed-up of the compiled
kernels, after checking that both backends return the same results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from safetyrisk._backend import available_backends


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(rng):
    obs = np.sort(rng.lognormal(4, 1, size=814))
    big = np.sort(rng.lognormal(4, 1, size=100_000))
    grid = np.linspace(0, obs.max() * 1.1, 512)
    fine = np.linspace(0, big.max() * 1.1, 4096)
    ints = rng.integers(0, 1000, size=100_000).astype(np.int64)
    ints_big = rng.integers(0, 10**6, size=1_000_000).astype(np.int64)
    return [
        ("kde  n=814    grid=512", "gauss_kernel_sum", (obs, grid, 20.0)),
        ("kde  n=1e5    grid=4096", "gauss_kernel_sum", (big, fine, 5.0)),
        ("inv  n=1e5    (ties)", "count_inversions", (ints,)),
        ("inv  n=1e6", "count_inversions", (ints_big,)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; timing the numpy backend only")
    names = sorted(backends)
    print(f"{'case':26s}" + "".join(f"{n:>12s}" for n in names) + f"{'speed-up':>10s}")
    for label, func, fargs in cases(np.random.default_rng(args.seed)):
        times, results = {}, {}
        for name in names:
            fn = getattr(backends[name], func)
            times[name], results[name] = best_time(lambda: fn(*fargs), args.repeat)
        if len(names) == 2:
            a, b = results["cython"], results["python"]
            same = np.allclose(a, b, rtol=1e-12, atol=1e-9) if func == "gauss_kernel_sum" else a == b
            if not same:
                raise SystemExit(f"{label}: backends disagree")
            speed = f"{times['python'] / times['cython']:9.1f}x"
        else:
            speed = ""
        print(f"{label:26s}" + "".join(f"{times[n] * 1e3:10.1f}ms" for n in names) + speed)


if __name__ == "__main__":
    main()
