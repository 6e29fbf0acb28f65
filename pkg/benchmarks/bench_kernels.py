"""Timing comparison of the compiled kernels against the pure-Python twins.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Prints per-kernel medians over repeated best-of runs. The compiled
module is optional; without it only the Python column appears.
"""

import timeit

import numpy as np

from windstat import _kernels_py

try:
    from windstat import _kernels_cy
except ImportError:
    _kernels_cy = None

REPEATS = 7


def _best(fn):
    return min(timeit.repeat(fn, number=1, repeat=REPEATS))


def bench_betainc(mod):
    rng = np.random.default_rng(1)
    a = rng.uniform(0.5, 40.0, size=2000)
    b = rng.uniform(0.5, 40.0, size=2000)
    x = rng.uniform(0.01, 0.99, size=2000)

    def run():
        for ai, bi, xi in zip(a, b, x):
            mod.betainc_cf(ai, bi, xi)

    return _best(run)


def bench_trace_density(mod):
    rng = np.random.default_rng(2)
    n = 8
    k1 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    k2 = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    p = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    a, b = np.cos(p), 1j * np.sin(p)
    da, db = -np.sin(p), 1j * np.cos(p)
    return _best(lambda: mod.trace_density_grid(k1, k2, a, b, da, db))


def bench_poisson_binomial(mod):
    rng = np.random.default_rng(3)
    probs = rng.uniform(0.0, 1.0, size=400)
    return _best(lambda: mod.poisson_binomial(probs))


BENCHES = [
    ("betainc_cf (2000 calls)", bench_betainc),
    ("trace_density_grid (8x8, 4096 pts)", bench_trace_density),
    ("poisson_binomial (400 modes)", bench_poisson_binomial),
]


def main():
    mods = [("python", _kernels_py)]
    if _kernels_cy is not None:
        mods.append(("cython", _kernels_cy))
    else:
        print("compiled kernels not importable; timing Python only\n")
    width = max(len(name) for name, _ in BENCHES)
    header = f"{'kernel'.ljust(width)}  " + "  ".join(
        f"{name:>10}" for name, _ in mods)
    if len(mods) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for name, bench in BENCHES:
        times = [bench(mod) for _, mod in mods]
        line = f"{name.ljust(width)}  " + "  ".join(
            f"{t * 1e3:8.2f}ms" for t in times)
        if len(times) == 2:
            line += f"  {times[0] / times[1]:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
