"""Command-line front end.

Subcommands: ``gen`` (emit synthetic CSV), ``test`` (single or interval
change-point tests), ``segment`` (recursive detection), ``bench`` (power,
size, critical-value and runtime studies). Every report embeds the resolved
configuration and seed; exit codes: 0 success, 2 data errors, 3 config
errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import bench, fast_tests, permutation, pvalues, scan, segmentation
from .errors import (AllPointsIdentical, ConfigError, DataFormatError,
                     DegenerateSplit, InvalidSpec, KcpScanError,
                     NonFiniteKernel, ZeroVariance)
from .generators import FAMILIES, GeneratorSpec, generate
from .gram import Sequence, build_gram, gram_from_kernel

SCHEMA_VERSION = 1
TEST_CHOICES = ("gkcp", "gkcp-interval", "fgkcp1", "fgkcp2",
                "fgkcp1-simes", "fgkcp2-simes", "zd", "zw")

_DATA_ERRORS = (DataFormatError, AllPointsIdentical, NonFiniteKernel,
                OSError, ZeroVariance)
_CONFIG_ERRORS = (ConfigError, InvalidSpec, DegenerateSplit, ValueError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # config errors exit 3, not argparse's 2
        self.exit(3, f"{self.prog}: error: {message}\n")


def read_csv_matrix(path: str, skip_header: bool = False) -> np.ndarray:
    """Strict CSV reader with line-numbered diagnostics."""
    rows = []
    width = None
    first = True
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            if first and skip_header:
                first = False
                continue
            first = False
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise DataFormatError(
                    f"{path}: line {ln}: expected {width} fields, found {len(parts)}")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise DataFormatError(f"{path}: line {ln}: non-numeric cell")
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_report(path, command: str, config: dict, result: dict) -> None:
    report = {"schema_version": SCHEMA_VERSION, "tool": "kcpscan",
              "command": command, "config": _jsonable(config),
              "result": _jsonable(result)}
    tmp = f"{path}.tmp"
    with open(tmp, "w") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
    os.replace(tmp, path)


def _add_gen_args(p, require_family: bool):
    p.add_argument("--gen", dest="family", choices=FAMILIES, required=require_family,
                   help="generator family (synthetic input)")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--tau", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--df", type=int, default=5)


def _add_input_args(p):
    p.add_argument("--input", help="CSV of observations, rows = time order")
    p.add_argument("--skip-header", action="store_true")
    p.add_argument("--gram", help="CSV of a precomputed symmetric kernel matrix")
    _add_gen_args(p, require_family=False)
    p.add_argument("--bandwidth", type=float, default=None,
                   help="kernel bandwidth override (default: median heuristic)")
    p.add_argument("--seed", type=int, default=0)


def _resolve_bound(value, n: int, is_n0: bool):
    if value is None:
        return None
    v = float(value)
    if 0 < v < 1:
        k = int(np.floor(v * n)) if is_n0 else int(np.floor(v * n))
        return max(2, k) if is_n0 else min(n - 2, k)
    return int(v)


def _load_gram(args):
    """Returns (gram, data_config_dict)."""
    sources = [args.input is not None, args.gram is not None,
               args.family is not None]
    if sum(sources) != 1:
        raise ConfigError("exactly one of --input, --gram, --gen is required")
    if args.gram is not None:
        k = read_csv_matrix(args.gram, skip_header=args.skip_header)
        g = gram_from_kernel(k)
        return g, {"gram": args.gram, "n": g.n}
    if args.input is not None:
        values = read_csv_matrix(args.input, skip_header=args.skip_header)
        seq = Sequence(values)
        cfg = {"input": args.input, "n": seq.n, "d": seq.d}
    else:
        spec = _spec_from_args(args)
        seq = generate(spec)
        cfg = {"generator": dataclasses.asdict(spec), "n": seq.n, "d": seq.d}
    g = build_gram(seq, bandwidth=args.bandwidth)
    cfg["bandwidth"] = g.bandwidth
    return g, cfg


def _spec_from_args(args) -> GeneratorSpec:
    return GeneratorSpec(family=args.family, d=args.d, n=args.n, tau=args.tau,
                         delta=args.delta, sigma2=args.sigma2, df=args.df,
                         seed=args.seed)


def _write_curve(path, prof: scan.ScanProfile) -> None:
    cols = np.column_stack([prof.t, prof.z_d, prof.z_w.get(1.2, np.full_like(prof.z_d, np.nan)),
                            prof.z_w.get(0.8, np.full_like(prof.z_d, np.nan)), prof.gkcp])
    header = "t,Z_D,Z_W12,Z_W08,GKCP"
    np.savetxt(path, cols, delimiter=",", header=header, comments="", fmt="%.17g")


def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    seq = generate(spec)
    np.savetxt(args.out, seq.values, delimiter=",", fmt="%.17g")
    print(f"wrote {seq.n} x {seq.d} observations to {args.out}")
    return 0


def cmd_test(args) -> int:
    g, data_cfg = _load_gram(args)
    n = g.n
    n0 = _resolve_bound(args.n0, n, True)
    n1 = _resolve_bound(args.n1, n, False)
    d0, d1 = scan.default_bounds(n)
    n0 = d0 if n0 is None else n0
    n1 = d1 if n1 is None else n1
    if not 2 <= n0 <= n1 <= n - 2:
        raise ConfigError(f"scan bounds [{n0}, {n1}] invalid for n={n}")
    mode = pvalues.EXACT_DISCRETE if args.derivative_mode == "exact" else pvalues.ASYMPTOTIC
    tail_cfg = pvalues.TailApproxConfig(n0=n0, n1=n1,
                                        skewness_correction=not args.no_skew,
                                        derivative_mode=mode)
    config = {**data_cfg, "test": args.test, "alpha": args.alpha, "n0": n0,
              "n1": n1, "r": args.r, "n_perm": args.n_perm, "seed": args.seed,
              "skewness_correction": not args.no_skew, "derivative_mode": mode}

    result: dict
    prof = None
    if args.test in ("fgkcp1", "fgkcp2", "fgkcp1-simes", "fgkcp2-simes"):
        variant = fast_tests.fgkcp1 if args.test.startswith("fgkcp1") else fast_tests.fgkcp2
        combine = fast_tests.SIMES if args.test.endswith("simes") else fast_tests.BONFERRONI
        rep = variant(g, n0, n1, alpha=args.alpha, combine=combine, cfg=tail_cfg)
        result = {"p": rep.combined_p, "rejected": rep.rejected,
                  "estimated_change": rep.estimated_change,
                  "argmax_t": rep.argmax_t, "max_gkcp": rep.max_gkcp,
                  "components": {"p_D": rep.p_D, "p_W12": rep.p_W12,
                                 "p_W08": rep.p_W08},
                  "observed": rep.observed}
    elif args.test in ("gkcp", "gkcp-interval"):
        statistic = "gkcp" if args.test == "gkcp" else "gkcp_interval"
        res = permutation.perm_pvalue(
            g, permutation.PermConfig(n_perm=args.n_perm, seed=args.seed,
                                      statistic=statistic), n0, n1)
        result = {"p": res.p, "observed": res.observed,
                  "rejected": res.p < args.alpha, "n_perm": res.n_perm}
        if args.test == "gkcp":
            prof = scan.scan_single(g, n0, n1)
            result["estimated_change"] = prof.argmax_t
            result["max_gkcp"] = prof.max_gkcp
        else:
            iprof = scan.scan_interval(g, n0, n1)
            result["estimated_interval"] = list(iprof.argmax_interval)
            result["max_gkcp"] = iprof.max_gkcp
    elif args.test == "zd":
        from .permutation import _max_ignore_nan
        prof = scan.scan_single(g, n0, n1)
        b = float(_max_ignore_nan(np.abs(prof.z_d)))
        rep = pvalues.pval_single_zd(b, g, tail_cfg)
        result = {"p": rep.p, "p_base": rep.p_base, "p_skew": rep.p_skew,
                  "observed": rep.b, "rejected": rep.p < args.alpha,
                  "estimated_change": prof.argmax_t,
                  "all_skew_invalid": rep.all_skew_invalid}
    else:  # zw: one-sided analytic test of the r-weighted scan
        from .permutation import _max_ignore_nan
        r = float(args.r)
        prof = scan.scan_single(g, n0, n1, r_list=(1.0, 1.2, 0.8, r))
        b = float(_max_ignore_nan(prof.z_w[r]))
        rep = pvalues.pval_single_zw(b, g, r, tail_cfg)
        result = {"p": rep.p, "p_base": rep.p_base, "p_skew": rep.p_skew,
                  "observed": rep.b, "rejected": rep.p < args.alpha,
                  "estimated_change": prof.argmax_t,
                  "all_skew_invalid": rep.all_skew_invalid}

    if args.curve_out:
        if prof is None or 1.2 not in prof.z_w or 0.8 not in prof.z_w:
            prof = scan.scan_single(g, n0, n1)
        _write_curve(args.curve_out, prof)
    if args.out:
        write_report(args.out, "test", config, result)
    print(json.dumps(_jsonable(result)))
    return 0


def cmd_segment(args) -> int:
    if args.family is not None:
        seq = generate(_spec_from_args(args))
        data_cfg = {"generator": dataclasses.asdict(_spec_from_args(args))}
    elif args.input is not None:
        seq = Sequence(read_csv_matrix(args.input, skip_header=args.skip_header))
        data_cfg = {"input": args.input}
    else:
        raise ConfigError("segment needs --input or --gen")
    tree = segmentation.binary_segment(
        seq, method=args.method, threshold=args.threshold, min_len=args.min_len,
        n_perm=args.n_perm, seed=args.seed, global_bandwidth=args.global_bandwidth)
    config = {**data_cfg, "method": args.method, "threshold": args.threshold,
              "min_len": tree.min_len, "n_perm": args.n_perm, "seed": args.seed,
              "global_bandwidth": args.global_bandwidth}

    def node_dict(node):
        return {"segment": [node.start, node.end], "p_value": node.p_value,
                "split": node.split, "reason": node.reason,
                "children": [node_dict(c) for c in node.children]}

    result = {"change_points": tree.change_points, "tree": node_dict(tree.root)}
    if args.out:
        write_report(args.out, "segment", config, result)
    print(json.dumps({"change_points": tree.change_points}))
    return 0


def cmd_bench(args) -> int:
    spec = None
    if args.study != "runtime":
        if args.family is None:
            raise ConfigError(f"--study {args.study} needs --gen FAMILY")
        spec = _spec_from_args(args)
    config = {"study": args.study,
              "generator": dataclasses.asdict(spec) if spec else None,
              "test": args.test, "replicates": args.replicates,
              "alpha": args.alpha, "n_perm": args.n_perm, "seed": args.seed}
    if args.study == "power":
        res = bench.power_study(spec, test=args.test, replicates=args.replicates,
                                alpha=args.alpha, n_perm=args.n_perm,
                                master_seed=args.seed, jsonl_path=args.jsonl)
        rows = [bench.summary_row(res)]
        result = bench.summary_row(res)
    elif args.study == "size":
        res = bench.size_study(spec, test=args.test, replicates=args.replicates,
                               alpha=args.alpha, n_perm=args.n_perm,
                               master_seed=args.seed, jsonl_path=args.jsonl)
        rows = [bench.summary_row(res)]
        result = bench.summary_row(res)
    elif args.study == "critical-values":
        n0_grid = tuple(int(x) for x in args.n0_grid.split(","))
        rows = bench.critical_value_study(spec, statistic=args.statistic,
                                          r=args.r, n0_grid=n0_grid,
                                          n_perm=args.n_perm, alpha=args.alpha)
        result = {"rows": rows}
    elif args.study == "runtime":
        n_grid = tuple(int(x) for x in args.n_grid.split(","))
        rows = bench.runtime_study(n_grid=n_grid, d=args.d,
                                   tests=tuple(args.test.split(",")),
                                   n_perm=args.n_perm, master_seed=args.seed)
        result = {"rows": rows}
    else:
        raise ConfigError(f"unknown study {args.study!r}")
    if args.csv:
        bench.write_csv(rows, args.csv)
    if args.out:
        write_report(args.out, "bench", config, result)
    print(json.dumps(_jsonable(result)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kcpscan",
                     description="Kernel change-point scan tests")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[], help="emit a synthetic CSV")
    _add_gen_args(p, require_family=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("test", help="single or interval change-point test")
    _add_input_args(p)
    p.add_argument("--test", choices=TEST_CHOICES, default="fgkcp1")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n0", type=float, default=None,
                   help="lower scan bound (int) or fraction of n")
    p.add_argument("--n1", type=float, default=None)
    p.add_argument("--r", type=float, default=1.2, help="weight for --test zw")
    p.add_argument("--n-perm", type=int, default=1000)
    p.add_argument("--derivative-mode", choices=("exact", "asymptotic"),
                   default="exact")
    p.add_argument("--no-skew", action="store_true",
                   help="disable the skewness correction")
    p.add_argument("--out", default=None, help="JSON report path")
    p.add_argument("--curve-out", default=None,
                   help="per-split scan curve CSV (t, Z_D, Z_W12, Z_W08, GKCP)")
    p.set_defaults(fn=cmd_test)

    p = sub.add_parser("segment", help="recursive multiple change-point detection")
    _add_input_args(p)
    p.add_argument("--method", choices=segmentation.METHODS, default="fgkcp1")
    p.add_argument("--threshold", type=float, default=0.001)
    p.add_argument("--min-len", type=int, default=None)
    p.add_argument("--n-perm", type=int, default=1000)
    p.add_argument("--global-bandwidth", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_segment)

    p = sub.add_parser("bench", help="power / size / critical-value / runtime studies")
    _add_gen_args(p, require_family=False)
    p.add_argument("--study", choices=("power", "size", "critical-values", "runtime"),
                   required=True)
    p.add_argument("--test", default="fgkcp2",
                   help="test name (comma list for runtime study)")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--n-perm", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--statistic", choices=("zd", "zw"), default="zd")
    p.add_argument("--r", type=float, default=1.2)
    p.add_argument("--n0-grid", default="100,75,50,25")
    p.add_argument("--n-grid", default="200,400,800")
    p.add_argument("--out", default=None)
    p.add_argument("--jsonl", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _DATA_ERRORS as e:
        print(f"kcpscan: data error: {e}", file=sys.stderr)
        return 2
    except _CONFIG_ERRORS as e:
        print(f"kcpscan: config error: {e}", file=sys.stderr)
        return 3
    except KcpScanError as e:
        print(f"kcpscan: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
