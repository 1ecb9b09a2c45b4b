"""Time the banded Liouvillian kernel: compiled extension against the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``.  The default shape is the one
the GHz and MHz adiabaticity runs use (1817 field levels, band 4, three atom levels).
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from berrytherm import _kernels_py
from berrytherm.kernels import BACKEND

try:
    from berrytherm import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def random_band(rng: np.random.Generator, N_f: int, N_d: int, K: int) -> np.ndarray:
    shape = (N_f, 2 * K + 1, N_d, N_d)
    R = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    R[~_kernels_py.band_mask(N_f, K)] = 0
    return R


def bench(fn, repeat: int, number: int) -> float:
    """Best time per call in seconds."""
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N-f", type=int, default=1817)
    ap.add_argument("--N-d", type=int, default=3)
    ap.add_argument("--band", type=int, default=4, help="field band half-width K")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=20)
    args = ap.parse_args(argv)

    R = random_band(np.random.default_rng(0), args.N_f, args.N_d, args.band)
    g, ca, cf = 1.2e-3, complex(np.exp(-0.3j)), complex(np.exp(-0.7j))
    out = np.empty_like(R)
    print(f"shape {R.shape}, selected backend: {BACKEND}")

    t_py = bench(lambda: _kernels_py.liouvillian_band(R, g, ca, cf, out), args.repeat, args.number)
    print(f"numpy   {t_py * 1e3:9.3f} ms/call")
    if compiled is None:
        print("cython  not built")
        return
    t_cy = bench(lambda: compiled.liouvillian_band(R, g, ca, cf, out), args.repeat, args.number)
    ref = _kernels_py.liouvillian_band(R, g, ca, cf)
    err = np.max(np.abs(compiled.liouvillian_band(R, g, ca, cf, np.empty_like(R)) - ref)) / np.max(np.abs(ref))
    print(f"cython  {t_cy * 1e3:9.3f} ms/call  ({t_py / t_cy:.1f}x faster, max rel. difference {err:.1e})")


if __name__ == "__main__":
    main()
