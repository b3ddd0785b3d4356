"""Time the per-pixel kernels on the compiled and numpy backends.

    python3 benchmarks/bench_backends.py [--size 64] [--repeat 3] [--threads 1]

Prints one row per kernel with the best wall time of each backend and the
largest absolute difference between their outputs.
"""

import argparse
import time

import numpy as np

from nlmsr import _backend, _pykernels, scenes
from nlmsr.imgcore import uniform_kernel
from nlmsr.superres import initial_estimate, synth_degrade


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(size, threads):
    noisy = scenes.smooth_scene(size) + np.random.default_rng(0).normal(0, 10, (size, size))
    seq = synth_degrade(scenes.test_scene(size), 2, uniform_kernel(3), 2.0, 9, seed=7)
    pilot = initial_estimate(seq, 0, 2)
    return [
        (f"nlm {size}x{size} q7 r10", lambda k: k.nlm_filter(noisy, 7, 10, 70.0, 5.0, threads)),
        (f"honlm order 2 {size}x{size}", lambda k: k.nonlocal_fit(noisy, 7, 10, 70.0, 5.0, 2, 0.0, threads)[0]),
        (f"fuse order 2 T=9 {size}x{size}", lambda k: k.fuse(pilot, seq, 2, 5, 3, 20.0, 1.5, 6.0, 2, 0.0, threads)[0]),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    if "cython" not in _backend.available():
        print("compiled extension not built; timing the numpy backend only")
    from importlib import import_module

    backends = {"python": _pykernels}
    if "cython" in _backend.available():
        backends["cython"] = import_module("nlmsr._kernels")
    names = list(backends)
    print(f"{'kernel':<28}" + "".join(f"{n + ' s':>12}" for n in names) + f"{'max diff':>12}")
    for label, fn in cases(args.size, args.threads):
        results = {n: best_of(lambda: fn(k), args.repeat) for n, k in backends.items()}
        outs = [np.asarray(results[n][1]) for n in names]
        diff = max(float(np.abs(o - outs[0]).max()) for o in outs)
        print(f"{label:<28}" + "".join(f"{results[n][0]:>12.3f}" for n in names) + f"{diff:>12.2g}")


if __name__ == "__main__":
    main()
