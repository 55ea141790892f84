"""Compiled kernels vs the numpy fallback.

    python3 benchmarks/bench_kernels.py --sizes 50 100 200 400 --out bench.csv
"""

import argparse
import csv
import sys

from emdhard import kernels
from emdhard.harness.bench import BENCH_HEADER, run_bench


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    rows = run_bench(args.sizes, args.seed, args.repeat)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh)
    w.writerow(BENCH_HEADER)
    for r in rows:
        w.writerow(r.as_tuple())
    if fh is not sys.stdout:
        fh.close()

    # speedup summary on stderr
    by = {}
    for r in rows:
        by.setdefault((r.kernel, r.size), {})[r.backend] = r.seconds
    print(f"active backend: {kernels.BACKEND}", file=sys.stderr)
    for (k, n), t in by.items():
        if "cython" in t and t["cython"] > 0:
            print(f"{k:22s} n={n:5d}  speedup {t['python'] / t['cython']:8.1f}x", file=sys.stderr)


if __name__ == "__main__":
    main()
