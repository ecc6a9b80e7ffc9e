"""Power study over the benchmark settings (n=200, tau=100, 100 replicates).

The default grid mirrors the reference mean-change and variance-change
settings per family and dimension; pass --quick for a small smoke run.

    python scripts/run_power.py --family gaussian_type1 --out power.csv
"""
import argparse
import sys

from kcpscan import GeneratorSpec, bench

# (d, delta, sigma2) grids per family and change type
POWER_GRID = {
    "gaussian_type1": {
        "mean": [(100, 1.20, 1.0), (500, 1.90, 1.0), (1000, 2.40, 1.0), (2000, 3.13, 1.0)],
        "variance": [(100, 0.0, 1.07), (500, 0.0, 1.04), (1000, 0.0, 1.03), (2000, 0.0, 1.0)],
    },
    "gaussian_type2": {
        "mean": [(100, 0.99, 1.0), (500, 2.37, 1.0), (1000, 2.46, 1.0), (2000, 3.16, 1.0)],
        "mean+variance": [(100, 0.65, 1.06), (500, 0.69, 1.04), (1000, 0.70, 1.03), (2000, 0.71, 1.03)],
    },
    "chi_square": {
        "mean": [(100, 2.60, 1.0), (500, 4.24, 1.0), (1000, 5.69, 1.0), (2000, 8.04, 1.0)],
        "variance": [(100, 0.0, 1.23), (500, 0.0, 1.11), (1000, 0.0, 1.10), (2000, 0.0, 1.09)],
    },
    "log_normal": {
        "mean": [(100, 1.20, 1.0), (500, 1.90, 1.0), (1000, 2.30, 1.0), (2000, 3.04, 1.0)],
    },
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--family", default="gaussian_type1",
                    choices=sorted(POWER_GRID))
    ap.add_argument("--tests", default="fgkcp1,fgkcp2,gkcp")
    ap.add_argument("--replicates", type=int, default=100)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--n-perm", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true",
                    help="small dimensions and 20 replicates")
    ap.add_argument("--out", default="power.csv")
    ap.add_argument("--jsonl", default=None)
    args = ap.parse_args()

    rows = []
    for change, grid in POWER_GRID[args.family].items():
        for d, delta, sigma2 in grid:
            if args.quick and d > 100:
                continue
            reps = 20 if args.quick else args.replicates
            spec = GeneratorSpec(family=args.family, d=d, n=args.n,
                                 tau=args.n // 2, delta=delta, sigma2=sigma2)
            for test in args.tests.split(","):
                res = bench.power_study(spec, test=test, replicates=reps,
                                        n_perm=args.n_perm,
                                        master_seed=args.seed,
                                        jsonl_path=args.jsonl)
                row = bench.summary_row(res)
                row["change"] = change
                rows.append(row)
                print(f"{args.family} {change} d={d}: {test} -> "
                      f"{res.rejections}/{reps} ({res.accurate} accurate)")
    bench.write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
