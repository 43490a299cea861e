"""Compare the compiled and pure-Python dominator scans.

    python benchmarks/bench_kernels.py [--q 200000] [--repeat 3]

The scan is the O(q) float prefilter inside the maximality test.  Both
backends must return identical candidate lists; the script exits 1 if
they differ.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit

from diogame import _kernels_py

try:
    from diogame import _kernels as compiled
except ImportError:
    compiled = None

CASES = [
    ("equal weights", [0.5, 0.5], 0.1),
    ("skewed weights", [2 / 3, 1 / 3], 0.1),
    ("3d", [1 / 3, 1 / 3, 1 / 3], 0.05),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` with Cython available")
        return 0
    rng = random.Random(args.seed)
    status = 0
    print(f"{'case':<16}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, r, c in CASES:
        q = args.q
        p = [rng.randrange(q) for _ in r]
        py = _kernels_py.dominator_scan(q, p, r, c)
        cy = compiled.dominator_scan(q, p, r, c)
        if py != cy:
            print(f"{name}: backends disagree ({len(py)} vs {len(cy)} candidates)")
            status = 1
        t_py = min(timeit.repeat(lambda: _kernels_py.dominator_scan(q, p, r, c), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: compiled.dominator_scan(q, p, r, c), number=1, repeat=args.repeat))
        print(f"{name:<16}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")
    return status


if __name__ == "__main__":
    sys.exit(main())
