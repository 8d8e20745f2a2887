"""Timings of the compiled kernels against the pure-Python fallback.

Run as: python3 benchmarks/bench_kernels.py [--sites N] [--repeat K]
The workload mirrors the hot paths: 2-RDM assembly, 1-RDM assembly,
orbital-subset reductions, and sparse Hamiltonian matrix elements on a
half-filled sector.
"""

import argparse
import time

import numpy as np

from meao import _pycore, kernels
from meao.fockspace import sector_configs


def _workload(n_orbitals):
    rng = np.random.default_rng(0)
    configs = sector_configs(n_orbitals, n_orbitals // 2, n_orbitals // 2)
    amps = rng.normal(size=len(configs)) + 1j * rng.normal(size=len(configs))
    amps /= np.linalg.norm(amps)
    return configs, amps.astype(np.complex128)


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sites", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    n = args.sites
    configs, amps = _workload(n)
    subset = np.arange(4, dtype=np.int64)
    p = np.array([2 * k for k in range(n - 1)], dtype=np.int64)
    q = np.array([2 * (k + 1) for k in range(n - 1)], dtype=np.int64)
    coeff = -np.ones(len(p))

    cases = [
        ("pair_annihilation", lambda m: m.pair_annihilation(configs, amps, n)),
        ("single_annihilation", lambda m: m.single_annihilation(configs, amps, n, 0)),
        ("subset_split", lambda m: m.subset_split(configs, subset, 2 * n)),
        ("one_body_elements", lambda m: m.one_body_elements(configs, p, q, coeff)),
    ]

    try:
        from meao import _core
    except ImportError:
        _core = None

    print(f"sector: {n} orbitals, {len(configs)} configurations")
    print(f"active backend: {kernels.BACKEND}")
    header = f"{'kernel':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, call in cases:
        t_py = _time(lambda: call(_pycore), args.repeat)
        if _core is not None:
            t_cy = _time(lambda: call(_core), args.repeat)
            ratio = f"{t_py / t_cy:9.1f}x"
            cy_ms = f"{1e3 * t_cy:14.2f}"
        else:
            ratio = "      n/a"
            cy_ms = f"{'n/a':>14}"
        print(f"{name:<22}{1e3 * t_py:14.2f}{cy_ms}{ratio}")


if __name__ == "__main__":
    main()
