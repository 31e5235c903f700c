"""Compare the jitted and pure-numpy pairwise kernel backends.

The fills benchmarked here run once per marginal-likelihood evaluation,
i.e. hundreds of thousands of times across a Monte-Carlo study, so their
per-call cost dominates the harness runtime.

    python benchmarks/bench_kernels.py [N]

N is the number of training points (default 25; try 108 for the CO2
problem size). The same comparison at the study level:

    GPHCRB_NO_NUMBA=1 gphcrb mc --config configs/fig4_constant_mean.json --out /tmp/np
    gphcrb mc --config configs/fig4_constant_mean.json --out /tmp/nb
"""

import sys
import time

import numpy as np

from gphcrb import _kernels_numpy

try:
    from gphcrb import _kernels_numba
except ImportError:
    _kernels_numba = None


CASES = [
    ("se", "se_fill", (1.7, 0.9)),
    ("periodic", "periodic_fill", (1.2, 0.7, 1.5, 4.0)),
    ("rq", "rq_fill", (1.1, 0.8, 1.9)),
    ("affine", "affine_fill", (0.5, 1.3)),
]


def bench(fn, args, reps):
    fn(*args)  # warm (JIT compile / cache touch)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps * 1e6


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 25
    reps = max(20, 20000 // n)
    rng = np.random.default_rng(0)
    X = rng.uniform(-5, 5, (n, 1))
    print(f"pairwise {n}x{n} fill with derivatives, {reps} reps (time per call, us)")
    print(f"{'kernel':<10} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for name, attr, beta in CASES:
        args = (X, X) + beta + (True,)
        t_np = bench(getattr(_kernels_numpy, attr), args, reps)
        if _kernels_numba is None:
            print(f"{name:<10} {t_np:>10.1f} {'n/a':>10} {'n/a':>9}")
            continue
        t_nb = bench(getattr(_kernels_numba, attr), args, reps)
        print(f"{name:<10} {t_np:>10.1f} {t_nb:>10.1f} {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
