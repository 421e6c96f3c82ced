#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the four hot kernels at headline dimensions (64 antennas, 8 users,
64 subcarriers) plus one end-to-end oracle run per backend.

    python benchmarks/bench_kernels.py [--repeats 20]
"""

import argparse
import time

import numpy as np

from phasemo import _kernels
from phasemo.config import ScenarioConfig
from phasemo.runner import oracle_check


def make_inputs(seed=0):
    rng = np.random.default_rng(seed)
    K, P, N, S, V, T = 8, 12, 64, 64, 8, 16
    steer = rng.standard_normal((K, P, N))
    delays = rng.uniform(0, 1e-7, (K, P))
    gains = rng.standard_normal((K, P)) + 1j * rng.standard_normal((K, P))
    offsets = (np.arange(S) - S // 2) * (100e6 / S)
    phi = np.exp(1j * rng.uniform(-np.pi, np.pi, (N, V)))
    gammas = rng.standard_normal((S, V, K)) + 1j * rng.standard_normal((S, V, K))
    x = rng.standard_normal((K, S, T)) + 1j * rng.standard_normal((K, S, T))
    z = rng.standard_normal(S * T * V) + 1j * rng.standard_normal(S * T * V)
    period = np.exp(1j * rng.uniform(-np.pi, np.pi, V * 32))
    held = np.tile(period, S * T)
    return {
        "cfr_accumulate": lambda: _kernels.cfr_accumulate(steer, delays, gains, offsets),
        "apply_per_subcarrier": lambda: _kernels.apply_per_subcarrier(phi, gammas, x),
        "zoh_hold": lambda: _kernels.zoh_hold(z, 32),
        "fps_modulate": lambda: _kernels.fps_modulate(held, period),
    }


def time_call(fn, repeats):
    fn()  # warm-up (includes JIT compilation on the numba path)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_oracle(repeats):
    cfg = ScenarioConfig(
        architecture="phasemo",
        n_antennas=8,
        n_users=2,
        chains=8,
        subcarriers=64,
        ofdm_symbols=8,
        seed=1,
    ).validate()
    return time_call(lambda: oracle_check(cfg), max(1, repeats // 4))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    results = {}
    for backend in backends:
        _kernels.set_backend(backend)
        timings = {name: time_call(fn, args.repeats) for name, fn in make_inputs().items()}
        timings["oracle_check (end-to-end)"] = bench_oracle(args.repeats)
        results[backend] = timings

    names = list(results[backends[0]].keys())
    width = max(len(n) for n in names)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in names:
        row = f"{name:<{width}}  " + "  ".join(f"{results[b][name] * 1e3:>10.3f}ms" for b in backends)
        if len(backends) == 2:
            row += f"  {results['numpy'][name] / results['numba'][name]:>7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
