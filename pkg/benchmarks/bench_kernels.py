"""Compare the compiled and pure-Python matching kernels.

Also reports how far the greedy min-degree sampler drifts from uniform
matching marginals (informational, nothing is asserted).

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]
"""

import argparse
import time

import numpy as np

from lscm_design import kernels
from lscm_design import matching as mt


def random_support(rng, k, density):
    a = (rng.random((k, k)) < density).astype(np.uint8)
    a[np.arange(k), rng.permutation(k)] = 1
    return a


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_backends(rng, repeat):
    found = kernels.backends()
    cases = [(k, random_support(rng, k, 0.35)) for k in (6, 8, 10, 12)]
    print(f"{'kernel':<12}{'k':>4}" + "".join(f"{name:>12}" for name in found) + f"{'speedup':>10}")
    for k, a in cases:
        u = rng.random((2000, k))
        jobs = {
            "enumerate": lambda mod: mod.enumerate_matchings(a, 10**6),
            "count": lambda mod: mod.count_marginals(a, 10**12),
            "greedy": lambda mod: mod.greedy_sample_batch(a, u),
        }
        for label, job in jobs.items():
            secs = {name: best_of(lambda: job(mod), repeat) for name, mod in found.items()}
            speed = secs["python"] / secs["cython"] if "cython" in secs else float("nan")
            cells = "".join(f"{secs[name] * 1e3:>10.2f}ms" for name in found)
            print(f"{label:<12}{k:>4}{cells}{speed:>9.1f}x")


def greedy_vs_uniform(rng, instances=50, m=20000):
    worst = []
    for _ in range(instances):
        bg = mt.BipartiteGraph(random_support(rng, int(rng.integers(4, 9)), 0.4))
        total, counts = mt.marginal_counts(bg)
        exact = counts / total
        rows = mt.sample_rows(bg, m, rng)
        emp = np.zeros_like(exact)
        for c in range(bg.n):
            emp[c] = np.bincount(rows[:, c], minlength=bg.n) / m
        worst.append(np.abs(emp - exact).max())
    worst = np.array(worst)
    print(f"greedy sampler vs uniform marginals over {instances} supports, {m} draws each:")
    print(f"  max |p_greedy - p_uniform|: median {np.median(worst):.4f}, max {worst.max():.4f}"
          f" (sampling noise ~{1 / np.sqrt(m):.4f})")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"active backend: {kernels.BACKEND}")
    bench_backends(rng, args.repeat)
    greedy_vs_uniform(rng)


if __name__ == "__main__":
    main()
