"""Compiled vs pure-Python kernels, plus SST scaling ratios.

    python3 benchmarks/bench_kernels.py [--reps 20] [--out bench.csv]
"""
import argparse

from dsst import bench
from dsst.io import write_rows_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = bench.compare_backends(reps=args.reps)
    print(f"{'kernel':12s} {'backend':9s} {'mean ms':>9s} {'min ms':>9s} {'speedup':>8s} identical")
    for r in rows:
        print(f"{r['kernel']:12s} {r['backend']:9s} {r['elapsed_mean'] * 1e3:9.3f} "
              f"{r['elapsed_min'] * 1e3:9.3f} {r['speedup_vs_python']:8.1f} {r['identical']}")
    scale = bench.scaling(reps=max(1, args.reps // 4))
    print()
    for r in scale:
        print(f"{r['check']:10s} {r['numerator']:>10s} / {r['denominator']:<10s} ratio {r['ratio']:.3f}")
    if args.out:
        write_rows_csv(args.out, rows + scale)


if __name__ == "__main__":
    main()
