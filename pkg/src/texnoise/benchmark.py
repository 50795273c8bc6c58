"""Benchmark the compiled descriptor kernels against the numpy fallback.

Run as `python -m texnoise.benchmark [--size N] [--repeats K]`. Both
backends are timed on identical inputs and their code maps are compared so
a speed report doubles as an equivalence check.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _kernels_py
from .descriptors import _KIRSCH_CELL_COEFFS, LbpParams, circle_offsets

try:
    from . import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(size: int = 256, repeats: int = 5) -> list[dict]:
    rng = np.random.default_rng(0)
    px = rng.random((size, size))
    offsets16 = circle_offsets(LbpParams(2, 16))
    cases = [
        ("lbp r=1 n=8", lambda m: m.lbp_code_map_r1n8(px)),
        ("lbp r=2 n=16", lambda m: m.lbp_code_map_circular(px, offsets16, 2)),
        ("ldp k=3", lambda m: m.ldp_code_map(px, 3, _KIRSCH_CELL_COEFFS)),
    ]
    results = []
    for name, call in cases:
        row = {"kernel": name, "python_s": _time(lambda: call(_kernels_py), repeats)}
        if _kernels is not None:
            row["compiled_s"] = _time(lambda: call(_kernels), repeats)
            row["speedup"] = row["python_s"] / row["compiled_s"]
            row["identical"] = bool(
                np.array_equal(call(_kernels), call(_kernels_py))
            )
        results.append(row)
    return results


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256, help="square image side")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    print(f"image {args.size}x{args.size}, best of {args.repeats}")
    if _kernels is None:
        print("compiled kernels unavailable; timing the numpy fallback only")
    header = f"{'kernel':<14} {'numpy':>10} {'compiled':>10} {'speedup':>8}  maps-equal"
    print(header)
    print("-" * len(header))
    for row in run(args.size, args.repeats):
        if "compiled_s" in row:
            print(
                f"{row['kernel']:<14} {row['python_s']*1e3:>8.2f}ms "
                f"{row['compiled_s']*1e3:>8.2f}ms {row['speedup']:>7.1f}x  "
                f"{row['identical']}"
            )
        else:
            print(f"{row['kernel']:<14} {row['python_s']*1e3:>8.2f}ms")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
