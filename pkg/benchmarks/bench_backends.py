"""Timing comparison of the pure-Python and compiled DP kernels.

Microbenchmarks run both kernel modules in the same process; the full-sweep
comparison re-executes this script with POLYMER_BACKEND forced, because the
DP module binds its kernel at import time.

Usage:
    python3 benchmarks/bench_backends.py            # compare everything
    python3 benchmarks/bench_backends.py --n 512    # smaller sweep
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from polymerlab.backends import pure

try:
    from polymerlab.backends import _speedups as compiled
except ImportError:
    compiled = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(impl, width, repeats):
    logw = np.empty(width)
    prev = np.zeros(width)
    out = np.empty(width)
    results = {}
    results["weights_row"] = _time(
        lambda: impl.weights_row(12345, 1.0, 7, -width // 2, logw), repeats)
    results["dp_row"] = _time(
        lambda: impl.dp_row(prev, 0, 0, logw, out, False), repeats)
    results["fold_logaddexp"] = _time(lambda: impl.fold_logaddexp(prev), repeats)
    return results


def bench_sweep(n, replicas):
    from polymerlab.backends import backend_name
    from polymerlab.disorder import GammaField
    from polymerlab.dp import flat_diagonal_logz

    cells = (2 * n + 1) * (2 * n + 2) // 2
    t0 = time.perf_counter()
    last = 0.0
    for rep in range(replicas):
        last = flat_diagonal_logz(GammaField(1.0, 1000 + rep), [n])[n]
    dt = (time.perf_counter() - t0) / replicas
    print(f"{backend_name:>8}: flat sweep n={n}  {dt:.3f} s/replica  "
          f"{dt / cells * 1e9:.1f} ns/cell  (logz={last:.6f})", flush=True)
    return last


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024, help="sweep endpoint (n,n)")
    ap.add_argument("--replicas", type=int, default=3)
    ap.add_argument("--width", type=int, default=4096,
                    help="row width for kernel microbenchmarks")
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--sweep-only", action="store_true",
                    help="internal: run the sweep with the selected backend")
    args = ap.parse_args()

    if args.sweep_only:
        bench_sweep(args.n, args.replicas)
        return 0

    impls = [("pure", pure)] + ([("compiled", compiled)] if compiled else [])
    if compiled is None:
        print("compiled kernel not built; microbenchmarking pure only")

    print(f"kernel microbenchmarks, row width {args.width}, best of {args.repeats}")
    for name, impl in impls:
        r = bench_kernels(impl, args.width, args.repeats)
        per = {k: v / args.width * 1e9 for k, v in r.items()}
        print(f"{name:>8}: " + "  ".join(f"{k} {per[k]:7.1f} ns/elem"
                                         for k in sorted(per)))

    if compiled is not None:
        a = np.empty(64)
        b = np.empty(64)
        pure.weights_row(7, 1.0, 9, -32, a)
        compiled.weights_row(7, 1.0, 9, -32, b)
        assert np.array_equal(a, b), "backend outputs diverged"
        print("bit-identity spot check: ok")

    print("full sweep (one process per backend):", flush=True)
    for backend in ("pure", "compiled") if compiled else ("pure",):
        env = dict(os.environ, POLYMER_BACKEND=backend)
        sweep_n = args.n if backend != "pure" else min(args.n, 256)
        cmd = [sys.executable, os.path.abspath(__file__), "--sweep-only",
               "--n", str(sweep_n), "--replicas", str(args.replicas)]
        subprocess.run(cmd, env=env, check=True)
    if compiled:
        print("note: the pure sweep is capped at n=256 to keep runtime sane;"
              " ns/cell is size-independent")
    return 0


if __name__ == "__main__":
    sys.exit(main())
