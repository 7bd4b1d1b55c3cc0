"""Compiled kernels vs the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Times each kernel on representative inputs with both backends, and
optionally one Incremental realization with each backend in a subprocess.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mpplan import _kernels_py as py

try:
    from mpplan import _kernels as ext
except ImportError:
    ext = None

E2E = ("import time; from mpplan.config import RunConfig; from mpplan.planner import run_flow; "
       "c = RunConfig(); t = c.load_topology(); d = c.load_demands(t); s = time.perf_counter(); "
       "run_flow('incremental', t, d, c.periods, c.growth(), c.plan_config(), 0); "
       "import mpplan; print(mpplan.BACKEND, time.perf_counter() - s)")


def cases():
    rng = np.random.default_rng(0)
    owner = (rng.random((26, 2, 400)) < 0.6).astype(np.int32)
    owner[:, :, 300:] = 0
    links = [1, 4, 9, 17]
    f = np.linspace(186e12, 196e12, 130)
    b = np.full(130, 70.6e9)
    w = np.full(130, 2e-26)
    return {
        "first_fit (4 links, 60% busy)": lambda k: k.first_fit(owner, links, 0, 12),
        "xpm_psi_sum (130 interferers)": lambda k: k.xpm_psi_sum(193e12, 70.6e9, f, b, w, 21.7e-27, 21.7e3),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20000)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    if ext is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'kernel':34} {'python us':>10} {'cython us':>10} {'speedup':>8}")
    for name, call in cases().items():
        assert call(py) == call(ext) or np.isclose(call(py), call(ext), rtol=1e-12)
        t_py = min(timeit.repeat(lambda: call(py), number=args.repeat, repeat=3)) / args.repeat * 1e6
        t_cy = min(timeit.repeat(lambda: call(ext), number=args.repeat, repeat=3)) / args.repeat * 1e6
        print(f"{name:34} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:7.1f}x")
    if args.end_to_end:
        for pure in ("1", ""):
            env = dict(os.environ, MPPLAN_PURE_PYTHON=pure)
            out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
            backend, secs = out.stdout.split()
            print(f"one incremental realization, {backend:6} backend: {float(secs):.2f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
