"""Empirical size study on homogeneous sequences (n=200).

    python scripts/run_size.py --family gaussian_type1 --dims 100,500 \
        --replicates 500 --out size.csv
"""
import argparse
import sys

from kcpscan import GeneratorSpec, bench


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--family", default="gaussian_type1")
    ap.add_argument("--dims", default="100,500,1000,2000")
    ap.add_argument("--tests", default="fgkcp1,fgkcp2,fgkcp1-simes,fgkcp2-simes,gkcp")
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--alpha", type=float, default=0.05)
    ap.add_argument("--n-perm", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="size.csv")
    args = ap.parse_args()

    rows = []
    for d in (int(x) for x in args.dims.split(",")):
        spec = GeneratorSpec(family=args.family, d=d, n=args.n)
        for test in args.tests.split(","):
            res = bench.size_study(spec, test=test, replicates=args.replicates,
                                   alpha=args.alpha, n_perm=args.n_perm,
                                   master_seed=args.seed)
            row = bench.summary_row(res)
            rows.append(row)
            print(f"{args.family} d={d}: {test} size = "
                  f"{res.rejection_rate:.3f}")
    bench.write_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
