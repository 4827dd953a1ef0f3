#!/usr/bin/env python3
"""Benchmark the compiled distance kernels against the numpy fallback.

Run from the repository root after building the extension:

    python benchmarks/bench_kernels.py

The numpy backend leans on BLAS matmuls, so it catches up on large inputs;
the compiled loops win on the small per-bin problems the grid actually runs.
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rdlp._kernels import _dist_np  # noqa: E402

try:
    from rdlp._kernels import _distc
except ImportError:
    _distc = None


def timed(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(n, k, dim, rng):
    x = np.ascontiguousarray(rng.normal(size=(n, dim)))
    c = np.ascontiguousarray(x[rng.choice(n, size=k, replace=False)])
    labels = np.ascontiguousarray(rng.integers(0, k, size=n), dtype=np.int64)
    rows = []
    for name, args in (
        ("assign_nearest", (x, c)),
        ("label_distance_sums", (x, labels, k)),
    ):
        t_np = timed(getattr(_dist_np, name), *args)
        t_c = timed(getattr(_distc, name), *args) if _distc else float("nan")
        rows.append((name, n, k, dim, t_np, t_c))
    return rows


def bench_kmeans(n, m, dim, rng):
    import os
    import subprocess

    code = (
        "import numpy as np, time, sys; sys.path.insert(0, 'src');"
        "from rdlp.cluster import kmeans;"
        f"x = np.random.default_rng(7).normal(size=({n}, {dim}));"
        "t0 = time.perf_counter(); kmeans(x, %d, seed=0); print(time.perf_counter() - t0)" % m
    )
    out = {}
    for label, env_extra in (("compiled", {}), ("numpy", {"RDLP_PURE_PYTHON": "1"})):
        env = dict(os.environ, **env_extra)
        result = subprocess.run(
            [sys.executable, "-c", code], capture_output=True, text=True, env=env,
            cwd=Path(__file__).resolve().parent.parent,
        )
        out[label] = float(result.stdout.strip()) if result.returncode == 0 else float("nan")
    return out


def main():
    rng = np.random.default_rng(0)
    if _distc is None:
        print("compiled kernels not built; showing numpy timings only")
    print(f"{'kernel':<22} {'n':>7} {'k':>4} {'dim':>4} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for n, k in ((300, 8), (2000, 20), (20000, 60)):
        for row in bench_case(n, k, 24, rng):
            name, n_, k_, d_, t_np, t_c = row
            speedup = t_np / t_c if t_c == t_c else float("nan")
            print(f"{name:<22} {n_:>7} {k_:>4} {d_:>4} {t_np:>9.4f}s {t_c:>9.4f}s {speedup:>7.2f}x")
    print()
    print("full k-means fit (fresh interpreter per backend):")
    for n, m in ((2000, 10), (20000, 40)):
        res = bench_kmeans(n, m, 24, rng)
        print(f"  n={n:<6} m={m:<3} numpy {res['numpy']:.3f}s  compiled {res['compiled']:.3f}s")


if __name__ == "__main__":
    main()
