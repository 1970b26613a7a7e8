"""Compare the numba and numpy backends on the hot kernels.

    python benchmarks/bench_kernels.py [--length 16384] [--repeat 5]

Prints best-of-N wall time per call for each backend and the speedup.
Outputs of the two backends are checked for agreement before timing.
"""
import argparse
import timeit

import numpy as np

from longmem import _backend, _kernels
from longmem.distributions import DistributionSpec
from longmem.estimators import build_grid
from longmem.harness import Cell, derive_stream, simulate_replication
from longmem.processes import ProcessSpec


def cases(length, rng):
    x = rng.standard_normal(length)
    arfima = ProcessSpec("arfima").coefficients()
    ar1 = ProcessSpec("ar1").coefficients()
    eps = rng.standard_normal(length + 1000)
    out = {
        "ar_filter arfima(100 lags)": lambda: _kernels.ar_filter(eps, arfima),
        "ar_filter ar1": lambda: _kernels.ar_filter(eps, ar1),
    }
    for scale in (32, 1024):
        out[f"windows rs  scale={scale}"] = (lambda s: lambda: _kernels.window_statistics(x, s, False))(scale)
        out[f"windows mrs scale={scale}"] = (lambda s: lambda: _kernels.window_statistics(x, s, True))(scale)

    def full_grid_mrs():
        for s in build_grid(length).scales:
            _kernels.window_statistics(x, int(s), True)

    out["all scales mrs"] = full_grid_mrs
    cell = Cell("mrs", DistributionSpec("log-t"), ProcessSpec("arfima"), length)
    out["one replication (arfima, mrs)"] = lambda: simulate_replication(cell, 5, derive_stream(1, 2, 3))
    return out


def check_agreement(length):
    x = np.random.default_rng(0).standard_t(3, length)
    res = {}
    for b in ("numba", "numpy"):
        with _backend.use_backend(b):
            res[b] = [_kernels.window_statistics(x, s, True) for s in (32, 256)]
            res[b].append((_kernels.ar_filter(x, ProcessSpec("arfima").coefficients()),))
    for a, b in zip(res["numba"], res["numpy"]):
        for u, v in zip(a, b):
            np.testing.assert_allclose(u, v, rtol=1e-10, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=2**14)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not _backend.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    check_agreement(args.length)

    timings = {}
    for b in ("numba", "numpy"):
        with _backend.use_backend(b):
            for name, fn in cases(args.length, np.random.default_rng(1)).items():
                fn()  # compile / warm caches
                t = timeit.Timer(fn)
                loops, _ = t.autorange()
                timings[(b, name)] = min(t.repeat(args.repeat, loops)) / loops

    names = list(cases(args.length, np.random.default_rng(1)))
    width = max(len(n) for n in names)
    print(f"length={args.length}, best of {args.repeat}")
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  speedup")
    for name in names:
        nb, npy = timings[("numba", name)], timings[("numpy", name)]
        print(f"{name:<{width}}  {nb * 1e3:8.3f}ms  {npy * 1e3:8.3f}ms  {npy / nb:6.1f}x")


if __name__ == "__main__":
    main()
