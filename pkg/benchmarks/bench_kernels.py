"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 5]

Also times a full word-BFS ball enumeration in both modes by re-running this
script's ``--ball`` step in a subprocess with TWISTLAB_DISABLE_NUMBA set.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from twistlab import kernels
from twistlab._accel import HAVE_NUMBA


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(rng):
    gens = rng.normal(size=(8, 4))
    gens[:, 3] = (1.0 + gens[:, 1] * gens[:, 2]) / gens[:, 0]
    frontier = rng.normal(size=(20000, 4))
    frontier[:, 3] = (1.0 + frontier[:, 1] * frontier[:, 2]) / frontier[:, 0]
    last = rng.integers(-1, 8, size=20000)
    mats = rng.normal(size=(200000, 4))
    ell = rng.uniform(3.0, 12.0, size=200000)
    vals = rng.normal(size=200000)

    def keyset(kind):
        def run():
            ks = kind()
            for chunk in np.array_split(kernels.matrix_keys_numpy(mats, 1e-6), 20):
                ks.add_new(chunk)
        return run

    return {
        "expand": (lambda: kernels.expand_numba(frontier, last, gens, 1e12),
                   lambda: kernels.expand_numpy(frontier, last, gens, 1e12)),
        "matrix_keys": (lambda: kernels.matrix_keys_numba(mats, 1e-6),
                        lambda: kernels.matrix_keys_numpy(mats, 1e-6)),
        "key_set": (keyset(kernels.KeySetNumba), keyset(kernels.KeySetNumpy)),
        "conjugate": (lambda: kernels.conjugate_numba(mats, gens[0]),
                      lambda: kernels.conjugate_numpy(mats, gens[0])),
        "twisted_terms": (lambda: kernels.twisted_terms_numba(ell, ell, 0.7, 2.0, 0.3),
                          lambda: kernels.twisted_terms_numpy(ell, ell, 0.7, 2.0, 0.3)),
        "compensated_sum": (lambda: kernels.compensated_sum_numba(vals),
                            lambda: kernels.compensated_sum_numpy(vals)),
    }


def ball_timing():
    from twistlab.spectrum import bolza_presentation, enumerate_ball

    p = bolza_presentation()
    enumerate_ball(p, 4.0)
    t0 = time.perf_counter()
    ball = enumerate_ball(p, 9.0)
    print(f"{time.perf_counter() - t0:.4f} {len(ball.mats)}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--ball", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.ball:
        ball_timing()
        return
    if not HAVE_NUMBA:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, (fast, slow) in workloads(rng).items():
        a, b = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<18}{a:>12.5f}{b:>12.5f}{b / a:>10.1f}")
    res = {}
    for flag in ("0", "1"):
        env = dict(os.environ, TWISTLAB_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--ball"], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        res[flag] = (float(out[0]), int(out[1]))
    a, b = res["0"][0], res["1"][0]
    print(f"{'ball(9) enum':<18}{a:>12.5f}{b:>12.5f}{b / a:>10.1f}   ({res['0'][1]} elements)")


if __name__ == "__main__":
    main()
