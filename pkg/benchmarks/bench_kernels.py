"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 10 30 61 100]

Each row reports the best-of-``repeat`` wall time per call for seed search,
greedy insertion, power iteration and one full TMFG + centrality window, and
checks that both backends return identical graphs.
"""
import argparse
import time

import numpy as np

from crashnet import _backend
from crashnet.tmfg import build_tmfg, eigenvector_centrality


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def similarity(n, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, 24))
    return np.ascontiguousarray(np.corrcoef(x))


def bench(n, repeat, backends):
    S = similarity(n)
    row = {}
    for name, k in backends.items():
        g = build_tmfg(S, kernels=k)
        A = np.ascontiguousarray(g.adjacency())
        row[name] = {
            "seed_search": best_of(lambda: k.seed_search(S), repeat),
            "greedy_insert": best_of(lambda: k.greedy_insert(S, g.seed), repeat),
            "power_iteration": best_of(lambda: k.power_iteration(A, 1e-10, 10_000), repeat),
            "window": best_of(lambda: eigenvector_centrality(build_tmfg(S, kernels=k), kernels=k), repeat),
        }
        row[name]["graph"] = g
    return row


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 30, 61, 100])
    args = p.parse_args(argv)
    backends = _backend.available()
    if "compiled" not in backends:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"{'n':>4} {'kernel':<16}" + "".join(f"{b:>14}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for n in args.sizes:
        row = bench(n, args.repeat, backends)
        if len(backends) > 1:
            assert row["compiled"]["graph"] == row["python"]["graph"], f"backends disagree at n={n}"
        for kernel in ("seed_search", "greedy_insert", "power_iteration", "window"):
            cells = "".join(f"{row[b][kernel] * 1e3:12.3f}ms" for b in backends)
            extra = ""
            if len(backends) > 1:
                extra = f"  {row['python'][kernel] / row['compiled'][kernel]:8.1f}x"
            print(f"{n:>4} {kernel:<16}{cells}{extra}")


if __name__ == "__main__":
    main()
