"""Runtime study: wall-clock per test per sequence length.

    python scripts/run_runtime.py --n-grid 200,400,600,800,1000,2000 --out runtime.csv
"""
import argparse
import sys

from kcpscan import bench


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-grid", default="200,400,600,800,1000,2000")
    ap.add_argument("--d", type=int, default=100)
    ap.add_argument("--tests", default="fgkcp1,fgkcp2,gkcp")
    ap.add_argument("--n-perm", type=int, default=1000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runtime.csv")
    args = ap.parse_args()

    rows = bench.runtime_study(
        n_grid=tuple(int(x) for x in args.n_grid.split(",")),
        d=args.d, tests=tuple(args.tests.split(",")),
        n_perm=args.n_perm, repeats=args.repeats, master_seed=args.seed)
    for row in rows:
        print(f"n={row['n']}: {row['test']} {row['mean_s']:.3f}s")
    bench.write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
