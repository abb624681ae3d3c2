"""Benchmark the compiled core against the pure-numpy fallback.

Times the two hot kernels (reduced-word scans, point-pair kernel sums) on
gamma2-sized workloads.  Run as:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from eistwist.backend import available_backends
from eistwist.group import builtin_group, _scan
from eistwist.representation import rep_stack, trivial_representation


def time_call(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    group = builtin_group("gamma2")
    rep = trivial_representation(group)
    gens = group.gen_mats
    invmap = np.array(group.invmap, dtype=np.int64)
    seed = np.array([1.0, 0.0, 0.0, 1.0])

    impls = available_backends()
    print(f"backends available: {', '.join(impls)}")

    rows = []
    for name, impl in impls.items():
        t, out = time_call(impl.word_scan, gens, invmap, seed, 11, 1e18)
        rows.append((f"word_scan L=11 (N={len(out[0])})", name, t))
        t, out = time_call(impl.word_scan, gens, invmap, seed, 60, 2e5)
        rows.append((f"word_scan mu<=2e5 (N={len(out[0])})", name, t))

    arrays = _scan(group, 8, np.inf)
    mats = arrays[0]
    chis = rep_stack(group, rep, arrays)
    rng = np.random.default_rng(0)
    zs = np.column_stack([rng.uniform(-1, 1, 60), rng.uniform(0.5, 2.5, 60)])
    ws = np.column_stack([rng.uniform(-1, 1, 60), rng.uniform(0.5, 2.5, 60)])
    for name, impl in impls.items():
        t, _ = time_call(impl.pair_kernel_sum, mats, chis, zs, ws, 0, 2.0,
                         repeat=2)
        rows.append((f"pair_kernel_sum 60x60xN={len(mats)}", name, t))

    width = max(len(r[0]) for r in rows)
    print(f"{'task':<{width}}  backend   seconds")
    for task, name, t in rows:
        print(f"{task:<{width}}  {name:<8}  {t:8.4f}")
    by_task = {}
    for task, name, t in rows:
        by_task.setdefault(task, {})[name] = t
    for task, d in by_task.items():
        if len(d) == 2:
            print(f"speedup {task}: {d['python'] / d['compiled']:.1f}x")


if __name__ == "__main__":
    main()
