#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks on
full-scale shapes (2000 users x 60 instants, pooled clustering points).

Also cross-checks that both variants return identical bytes, which is the
contract that makes TCE_PURE_NUMPY=1 output-preserving.
"""

import argparse
import time

import numpy as np

from tce import _kernels as kern

USERS = 2000
INSTANTS = 60
ZONES = 6
WINDOW = 10


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm-up (also triggers JIT compilation)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def as_bytes(result):
    if isinstance(result, tuple):
        return b"".join(np.ascontiguousarray(r).tobytes() for r in result)
    return np.ascontiguousarray(result).tobytes()


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--users", type=int, default=USERS)
    parser.add_argument("--instants", type=int, default=INSTANTS)
    parser.add_argument("--zones", type=int, default=ZONES)
    parser.add_argument("--window", type=int, default=WINDOW)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if not kern.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    points = rng.uniform(0, 80, size=(args.users * args.instants, 2))
    centroids = rng.uniform(0, 80, size=(args.zones, 2))
    labels_pts, _ = kern.nearest_labels_np(points, centroids)
    labels = rng.integers(0, args.zones, size=(args.users, args.instants)).astype(np.int64)
    uniforms = rng.random((args.users, args.instants - args.window))

    cases = [
        ("nearest_labels", kern.nearest_labels_np, kern.nearest_labels_nb,
         (points, centroids)),
        ("accumulate_points", kern.accumulate_points_np, kern.accumulate_points_nb,
         (points, labels_pts, args.zones)),
        ("count_transitions", kern.count_transitions_np, kern.count_transitions_nb,
         (labels, 0, args.instants - 1, args.zones)),
        ("predict_series general", kern.predict_series_np, kern.predict_series_nb,
         (labels, args.zones, args.window, False, uniforms)),
        ("predict_series per_user", kern.predict_series_np, kern.predict_series_nb,
         (labels, args.zones, args.window, True, uniforms)),
    ]

    print(f"{args.users} users x {args.instants} instants, {args.zones} zones, window {args.window}")
    print(f"{'kernel':<26} {'numpy':>10} {'numba':>10} {'speedup':>9}  identical")
    for name, fn_np, fn_nb, case_args in cases:
        t_np, out_np = timeit(fn_np, *case_args, repeat=args.repeat)
        t_nb, out_nb = timeit(fn_nb, *case_args, repeat=args.repeat)
        same = as_bytes(out_np) == as_bytes(out_nb)
        print(f"{name:<26} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>8.1f}x  {same}")
        if not same:
            raise SystemExit(f"variant mismatch in {name}")


if __name__ == "__main__":
    main()
