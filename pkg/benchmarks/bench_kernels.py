"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Prints one row per kernel with the best wall time of each backend and the speedup.
"""

import argparse
import time

import numpy as np

from entangle_ks import _backend
from entangle_ks.classical import ClassicalState
from entangle_ks.tangent import tangent_basis

X0 = ClassicalState.from_angles((np.pi / 4, 0.0, 3 * np.pi / 4, 0.0)).as_array()


def cases(scale):
    n_pts = int(100_000 * scale)
    n_long = int(200_000 * scale)
    rng = np.random.default_rng(0)
    v = rng.normal(size=(2, n_pts, 3))
    v /= np.linalg.norm(v, axis=2, keepdims=True)
    Q0 = np.ascontiguousarray(tangent_basis(X0))

    def evolve(k):
        S, L = v[0].copy(), v[1].copy()
        k.evolve_many(S, L, 5.0, 3.0, 10)

    return [
        (f"evolve_many {n_pts} pts x 10", evolve),
        (f"trajectory {n_long}", lambda k: k.trajectory(X0, 5.0, 3.0, n_long)),
        (f"section {n_long}", lambda k: k.section(X0, 5.0, 3.0, n_long, 0.01)),
        (f"benettin {n_long}", lambda k: k.benettin(X0, Q0, 5.0, 3.0, 0, n_long, 20)),
    ]


def best_time(fn, kernels, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(kernels)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--scale", type=float, default=1.0, help="multiply problem sizes")
    args = p.parse_args(argv)
    if _backend.compiled_kernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'kernel':<32}{'compiled [s]':>14}{'python [s]':>14}{'speedup':>10}")
    for name, fn in cases(args.scale):
        tc = best_time(fn, _backend.compiled_kernels, args.repeat)
        tp = best_time(fn, _backend.python_kernels, args.repeat)
        print(f"{name:<32}{tc:>14.4f}{tp:>14.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
