"""Compare the numba and pure-numpy kernel backends.

Times each divided-difference kernel on a batch of spectra with both
backends in-process, then runs the gradient suite once per backend in a
subprocess (the backend is fixed at import time by QIGEOM_DISABLE_NUMBA).

    python3 benchmarks/bench_kernels.py [--batch 2000] [--dim 6] [--repeat 20]
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from qigeom import kernels
from qigeom._accel import HAVE_NUMBA

SUITE_SNIPPET = """
import time
from qigeom import SuiteConfig, run_suite
from qigeom._accel import BACKEND
run_suite(SuiteConfig(dims=(2,), trials_per_check=1, suites=("gradient",)))  # warm-up / compile
t = time.perf_counter()
reps = run_suite(SuiteConfig(suites=("gradient",)))
print(BACKEND, time.perf_counter() - t, sum(r.passed for r in reps), len(reps))
"""


def _spectra(batch, n, rng):
    w = rng.standard_exponential((batch, n))
    return w / w.sum(axis=1, keepdims=True) + 1e-3


def bench_kernels(batch, n, repeat):
    rng = np.random.default_rng(0)
    p = _spectra(batch, n, rng)
    xt = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    yt = rng.standard_normal((batch, n, n)) + 1j * rng.standard_normal((batch, n, n))
    kern = kernels.logmean_kernel(p, backend="numpy")
    cases = {
        "mean": lambda b: kernels.mean_kernel(p, backend=b),
        "wy": lambda b: kernels.wy_kernel(p, backend=b),
        "logmean": lambda b: kernels.logmean_kernel(p, backend=b),
        "expdd": lambda b: kernels.expdd_kernel(np.log(p), backend=b),
        "inner": lambda b: kernels.weighted_inner(xt, yt, kern, backend=b),
    }
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"kernel timings, batch={batch} dim={n}, best of {repeat} (ms)")
    print(f"{'kernel':<10}" + "".join(f"{b:>12}" for b in backends) + (f"{'speedup':>10}" if HAVE_NUMBA else ""))
    for name, fn in cases.items():
        times = {}
        for b in backends:
            fn(b)  # compile / warm caches
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=repeat)) * 1e3
        if HAVE_NUMBA:
            ref, fast = cases[name]("numpy"), cases[name]("numba")
            assert np.allclose(ref, fast, rtol=1e-12, atol=1e-14), name
        row = f"{name:<10}" + "".join(f"{times[b]:>12.3f}" for b in backends)
        if HAVE_NUMBA:
            row += f"{times['numpy'] / times['numba']:>9.2f}x"
        print(row)


def bench_suite():
    print("\ngradient suite (dims 2,3,4,6, 100 trials), seconds")
    for flag in ("0", "1"):
        env = dict(os.environ, QIGEOM_DISABLE_NUMBA=flag)
        t = time.perf_counter()
        out = subprocess.run([sys.executable, "-c", SUITE_SNIPPET], env=env, capture_output=True, text=True, check=True)
        backend, secs, passed, total = out.stdout.split()
        print(f"{backend:<8} suite {float(secs):7.2f}  process {time.perf_counter() - t:7.2f}  passed {passed}/{total}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=2000)
    ap.add_argument("--dim", type=int, default=6)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--skip-suite", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.batch, args.dim, args.repeat)
    if not args.skip_suite:
        bench_suite()


if __name__ == "__main__":
    main()
