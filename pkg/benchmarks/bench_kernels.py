"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel is run on the same inputs under both backends; outputs are
checked for agreement before timings are reported. A forward pass of a
QPCANet-2 model is timed with each backend swapped in as well.
"""
import argparse
import timeit

import numpy as np

from qpcanet import kernels
from qpcanet.network import NetworkConfig, StageConfig, forward, train_model


def _tridiagonal(rng, n):
    d = rng.normal(size=n)
    e = rng.normal(size=n)
    e[-1] = 0.0
    return d, e


def cases(rng):
    x = rng.normal(size=(4, 32, 32))
    bank = rng.normal(size=(32, 4, 3, 3))
    values = rng.integers(0, 256, size=(32, 32, 32))
    starts = np.arange(0, 25, 3, dtype=np.int64)
    starts = np.append(starts, 25)
    d, e = _tridiagonal(rng, 72)

    def ql(mod):
        dd, ee, z = d.copy(), e.copy(), np.eye(72)
        mod.tridiagonal_ql(dd, ee, z)
        return dd

    return {
        "correlate_bank 4x32x32 * 32 filters 3x3": lambda mod: mod.correlate_bank(x, bank),
        "block_histograms 32 maps, 100 blocks, 256 bins": lambda mod: mod.block_histograms(values, starts, starts, 7, 7, 256),
        "tridiagonal_ql n=72 with vectors": ql,
    }


def bench_forward(rng, repeat):
    cfg = NetworkConfig("qpcanet", (StageConfig(3, 3, 8), StageConfig(3, 3, 8)), 7, 7, 0.5)
    images = [rng.random((32, 32, 3)) for _ in range(3)]
    model = train_model(cfg, images)
    out = {}
    for name, mod in kernels.BACKENDS.items():
        saved = kernels.correlate_bank, kernels.block_histograms
        kernels.correlate_bank, kernels.block_histograms = mod.correlate_bank, mod.block_histograms
        try:
            out[name] = min(timeit.repeat(lambda: forward(model, images[0]), number=1, repeat=repeat))
        finally:
            kernels.correlate_bank, kernels.block_histograms = saved
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    names = sorted(kernels.BACKENDS)
    if "compiled" not in names:
        print("compiled extension not available; timing the NumPy fallback only")
    print(f"{'kernel':<50}" + "".join(f"{n:>12}" for n in names) + f"{'speed-up':>10}")
    for label, fn in cases(rng).items():
        results = {n: fn(kernels.BACKENDS[n]) for n in names}
        ref = results[names[0]]
        for n in names[1:]:
            np.testing.assert_allclose(results[n], ref, rtol=1e-10, atol=1e-10)
        times = {n: min(timeit.repeat(lambda: fn(kernels.BACKENDS[n]), number=3, repeat=args.repeat)) / 3 for n in names}
        speed = times["python"] / times["compiled"] if "compiled" in times else 1.0
        print(f"{label:<50}" + "".join(f"{1e3 * times[n]:>10.2f}ms" for n in names) + f"{speed:>9.1f}x")
    fwd = bench_forward(rng, args.repeat)
    speed = fwd["python"] / fwd["compiled"] if "compiled" in fwd else 1.0
    label = "forward QPCANet-2 32x32, L1=L2=8"
    print(f"{label:<50}" + "".join(f"{1e3 * fwd[n]:>10.2f}ms" for n in names) + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
