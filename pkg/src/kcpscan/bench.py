"""Experiment harness: power, size, critical-value and runtime studies.

Desk-scale defaults relative to the reference studies: 100 power replicates,
500 size replicates, 2000 permutations for critical values. Replicate seeds
are pure functions of (master seed, replicate index), so every study is
reproducible and parallelizable without changing results.
"""
from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import fast_tests, permutation, pvalues, scan
from .errors import ConfigError
from .generators import GeneratorSpec, generate, null_spec, replicate_spec
from .gram import GramSummary, build_gram

TESTS = ("gkcp", "fgkcp1", "fgkcp2", "fgkcp1-simes", "fgkcp2-simes")
ACCURACY_WINDOW = 20


@dataclass
class ExperimentResult:
    test: str
    spec: GeneratorSpec
    replicates: int
    rejections: int
    accurate: int
    alpha: float
    runtime_total: float
    runtime_mean: float
    records: list = field(default_factory=list)

    @property
    def rejection_rate(self) -> float:
        return self.rejections / self.replicates


def run_test_on_gram(g: GramSummary, test: str, alpha: float = 0.05,
                     n_perm: int = 1000, seed: int = 0,
                     cfg: pvalues.TailApproxConfig | None = None):
    """One decision on a prepared gram: returns (p, rejected, estimate)."""
    if test == "gkcp":
        res = permutation.perm_pvalue(
            g, permutation.PermConfig(n_perm=n_perm, seed=seed, statistic="gkcp"))
        prof = scan.scan_single(g, r_list=(1.0,))
        return res.p, res.p < alpha or alpha >= 1.0, prof.argmax_t
    if test not in TESTS:
        raise ConfigError(f"unknown test {test!r}; choose from {TESTS}")
    variant = fast_tests.fgkcp1 if test.startswith("fgkcp1") else fast_tests.fgkcp2
    combine = fast_tests.SIMES if test.endswith("simes") else fast_tests.BONFERRONI
    rep = variant(g, alpha=alpha, combine=combine, cfg=cfg)
    return rep.combined_p, rep.rejected, rep.argmax_t


def power_study(spec: GeneratorSpec, test: str = "fgkcp2", replicates: int = 100,
                alpha: float = 0.05, n_perm: int = 1000, master_seed: int = 0,
                accuracy_window: int = ACCURACY_WINDOW,
                jsonl_path=None) -> ExperimentResult:
    """Rejection and within-window localization counts over fresh replicates."""
    rejections = accurate = 0
    records = []
    t0 = time.perf_counter()
    for k in range(replicates):
        spec_k = replicate_spec(spec, master_seed, k)
        seq = generate(spec_k)
        tic = time.perf_counter()
        g = build_gram(seq)
        p, rejected, estimate = run_test_on_gram(
            g, test, alpha=alpha, n_perm=n_perm, seed=spec_k.seed)
        runtime = time.perf_counter() - tic
        hit = bool(rejected and spec.tau is not None
                   and abs(estimate - spec.tau) <= accuracy_window)
        rejections += bool(rejected)
        accurate += hit
        records.append({"replicate": k, "seed": spec_k.seed, "p": p,
                        "rejected": bool(rejected), "estimate": int(estimate),
                        "accurate": hit, "runtime_s": runtime})
    total = time.perf_counter() - t0
    result = ExperimentResult(test=test, spec=spec, replicates=replicates,
                              rejections=rejections, accurate=accurate,
                              alpha=alpha, runtime_total=total,
                              runtime_mean=total / max(replicates, 1),
                              records=records)
    if jsonl_path:
        write_jsonl(records, jsonl_path)
    return result


def size_study(spec: GeneratorSpec, test: str = "fgkcp1", replicates: int = 500,
               alpha: float = 0.05, n_perm: int = 1000, master_seed: int = 0,
               jsonl_path=None) -> ExperimentResult:
    """Empirical size: the power study run on the matched null generator."""
    return power_study(null_spec(spec), test=test, replicates=replicates,
                       alpha=alpha, n_perm=n_perm, master_seed=master_seed,
                       jsonl_path=jsonl_path)


def _perm_range_maxima(g: GramSummary, ranges, seed: int, n_perm: int,
                       r_list=(1.0, 1.2, 0.8)) -> dict:
    """Per-permutation maxima over several nested scan ranges in one pass."""
    wide_lo = min(a for a, _ in ranges)
    wide_hi = max(b for _, b in ranges)
    sm = scan.scan_moments(g, wide_lo, wide_hi, r_list)
    t_idx = sm.t - 1
    diag = np.diagonal(g.k).copy()
    out = {rg: {"gkcp": np.empty(n_perm), "zd": np.empty(n_perm),
                **{f"zw:{float(r)}": np.empty(n_perm) for r in r_list}}
           for rg in ranges}
    block = permutation._block_size(g.n)
    for start in range(0, n_perm, block):
        ks = range(start, min(start + block, n_perm))
        perms = np.stack([permutation.permutation_for(seed, k, g.n) for k in ks])
        kp = g.k[perms[:, :, None], perms[:, None, :]]
        np.cumsum(kp, axis=1, out=kp)
        np.cumsum(kp, axis=2, out=kp)
        bidx = np.arange(len(perms))[:, None]
        diag_cum = np.cumsum(diag[perms], axis=1)
        A = kp[bidx, t_idx[None, :], t_idx[None, :]] - diag_cum[:, t_idx]
        L = np.cumsum(g.c[perms], axis=1)[:, t_idx]
        z_d, z_w, gkcp = scan.z_stats(g, sm, A, L)
        sl = slice(start, start + len(perms))
        for rg in ranges:
            a, b = rg
            cols = slice(a - wide_lo, b - wide_lo + 1)
            out[rg]["gkcp"][sl] = permutation._max_ignore_nan(gkcp[:, cols], axis=1)
            out[rg]["zd"][sl] = permutation._max_ignore_nan(np.abs(z_d[:, cols]), axis=1)
            for r in r_list:
                out[rg][f"zw:{float(r)}"][sl] = permutation._max_ignore_nan(
                    z_w[float(r)][:, cols], axis=1)
    return out


def critical_value_study(spec: GeneratorSpec, statistic: str = "zd", r: float = 1.2,
                         n0_grid=(100, 75, 50, 25), n_perm: int = 2000,
                         alpha: float = 0.05,
                         derivative_mode: str = pvalues.EXACT_DISCRETE) -> list:
    """Analytic (skewness-corrected) vs permutation critical values at level
    alpha, for each n0 in the grid with n1 = n - n0, on one null sequence."""
    if statistic not in ("zd", "zw"):
        raise ConfigError("statistic must be 'zd' or 'zw'")
    seq = generate(null_spec(spec))
    g = build_gram(seq)
    n = g.n
    ranges = [(n0, n - n0) for n0 in n0_grid]
    key = "zd" if statistic == "zd" else f"zw:{float(r)}"
    r_list = (1.0,) if statistic == "zd" else (1.0, float(r))
    maxima = _perm_range_maxima(g, ranges, seed=spec.seed, n_perm=n_perm,
                                r_list=r_list)
    rows = []
    for n0, rg in zip(n0_grid, ranges):
        cfg = pvalues.TailApproxConfig(n0=rg[0], n1=rg[1],
                                       derivative_mode=derivative_mode)
        cfg_base = replace(cfg, skewness_correction=False)
        if statistic == "zd":
            pfun = lambda b: pvalues.pval_single_zd(b, g, cfg).p
            pfun_base = lambda b: pvalues.pval_single_zd(b, g, cfg_base).p
        else:
            pfun = lambda b: pvalues.pval_single_zw(b, g, float(r), cfg).p
            pfun_base = lambda b: pvalues.pval_single_zw(b, g, float(r), cfg_base).p
        ana = pvalues.critical_value(pfun, alpha=alpha)
        ana_base = pvalues.critical_value(pfun_base, alpha=alpha)
        per = float(np.quantile(maxima[rg][key], 1.0 - alpha))
        rows.append({"statistic": statistic, "r": float(r) if statistic == "zw" else None,
                     "n0": n0, "n1": rg[1], "ana": ana, "ana_base": ana_base,
                     "per": per, "n_perm": n_perm, "alpha": alpha})
    return rows


def runtime_study(n_grid=(200, 400, 600, 800), d: int = 100,
                  tests=("fgkcp1", "fgkcp2", "gkcp"), n_perm: int = 1000,
                  repeats: int = 3, master_seed: int = 0) -> list:
    """Wall-clock per test per sequence length (gram build included)."""
    rows = []
    for n in n_grid:
        spec = GeneratorSpec(family="gaussian_type1", d=d, n=n, seed=master_seed)
        for test in tests:
            times = []
            for rep in range(repeats):
                seq = generate(replicate_spec(spec, master_seed, rep))
                tic = time.perf_counter()
                g = build_gram(seq)
                run_test_on_gram(g, test, n_perm=n_perm, seed=rep)
                times.append(time.perf_counter() - tic)
            rows.append({"n": n, "d": d, "test": test,
                         "mean_s": float(np.mean(times)),
                         "min_s": float(np.min(times)), "repeats": repeats})
    return rows


def write_jsonl(records, path) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def write_csv(rows, path) -> None:
    if not rows:
        raise ValueError("nothing to write")
    keys = list(rows[0].keys())
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=keys)
        writer.writeheader()
        writer.writerows(rows)


def summary_row(result: ExperimentResult) -> dict:
    spec = result.spec
    return {"test": result.test, "family": spec.family, "n": spec.n, "d": spec.d,
            "tau": spec.tau, "delta": spec.delta, "sigma2": spec.sigma2,
            "replicates": result.replicates, "rejections": result.rejections,
            "accurate": result.accurate, "alpha": result.alpha,
            "rejection_rate": result.rejection_rate,
            "runtime_mean_s": result.runtime_mean}
