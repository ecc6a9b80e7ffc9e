"""Scan statistics over candidate split points and candidate intervals.

The whole single-split scan costs O(n^2): one pass of 2-d prefix sums gives
the within-prefix kernel total A(t) and the prefix row-sum total L(t) for all
t, and every statistic at split t is an affine function of (A(t), L(t)) whose
null mean and variance come from :mod:`kcpscan.moments`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import moments
from .errors import DegenerateSplit, ZeroVariance
from .gram import GramSummary

DEFAULT_R_LIST = (1.0, 1.2, 0.8)
_DET_GUARD = 1e-14


def default_bounds(n: int) -> tuple[int, int]:
    """Scan window [n0, n - n0] with n0 = floor(0.05 n), clamped so the
    null moments exist."""
    n0 = max(2, int(np.floor(0.05 * n)))
    return n0, n - n0


def _check_bounds(n: int, n0: int, n1: int) -> None:
    if not 2 <= n0 <= n1 <= n - 2:
        raise DegenerateSplit(f"scan bounds [{n0}, {n1}] outside [2, {n - 2}]")


def prefix_stats(g: GramSummary, order: np.ndarray | None = None):
    """A(t) and L(t) for t = 1..n-1 along the given observation order.

    A(t) is the ordered-pair kernel total within the first t positions; L(t)
    is the sum of their (full) kernel row sums. Kernel values are
    permutation-covariant, so reordering only permutes rows and columns.
    """
    k = g.k if order is None else g.k[np.ix_(order, order)]
    c = g.c if order is None else g.c[order]
    T2 = k.cumsum(axis=0).cumsum(axis=1)
    diag_cum = np.cumsum(np.diagonal(k))
    t = np.arange(1, g.n)
    A = T2[t - 1, t - 1] - diag_cum[t - 1]
    L = np.cumsum(c)[t - 1]
    return A, L


@dataclass(frozen=True)
class ScanMoments:
    """Per-split null means/sds for D and each W_r, precomputed once.

    These depend only on the gram aggregates, never on the observation
    order, so one instance serves every permutation replicate. Components
    whose null variance vanishes (a constant statistic, e.g. D on a kernel
    with equal row sums) are masked out per split; they contribute zero to
    the scan value, which is exact because a zero-variance statistic never
    deviates from its mean under any relabeling.
    """

    t: np.ndarray
    mean_d: np.ndarray
    sd_d: np.ndarray
    valid_d: np.ndarray
    w_coef: dict  # r -> (g, y) coefficients of W_r = g A - 2 y L + y R0
    mean_w: dict
    sd_w: dict
    valid_w: dict
    valid: np.ndarray   # split enters the scan: some component is live

    @property
    def nt(self) -> int:
        return len(self.t)


def scan_moments(g: GramSummary, n0: int, n1: int, r_list=DEFAULT_R_LIST) -> ScanMoments:
    _check_bounds(g.n, n0, n1)
    t = np.arange(n0, n1 + 1)
    r_all = set(float(r) for r in r_list) | {1.0}  # r=1 always feeds the scan value
    mean_d, var_d = moments.d_moments(g, t)
    scale = g.cen.R1 * 1e-14 + 1e-300
    valid_d = var_d > scale
    w_coef, mean_w, sd_w, valid_w = {}, {}, {}, {}
    for r in sorted(r_all):
        w_coef[r] = moments.w_weights(g.n, t, r)
        mw, vw = moments.w_moments(g, t, r)
        valid_w[r] = vw > scale
        mean_w[r] = mw
        sd_w[r] = np.sqrt(np.maximum(vw, 0.0))
    valid = valid_d | valid_w[1.0]
    if not valid.any():
        raise ZeroVariance("all splits in range have zero null variance")
    return ScanMoments(t=t, mean_d=mean_d, sd_d=np.sqrt(np.maximum(var_d, 0.0)),
                       valid_d=valid_d, w_coef=w_coef, mean_w=mean_w,
                       sd_w=sd_w, valid_w=valid_w, valid=valid)


def z_stats(g: GramSummary, sm: ScanMoments, A: np.ndarray, L: np.ndarray):
    """Standardized statistics from (A, L) sampled at sm.t.

    A and L may carry leading batch dimensions. Returns (z_d, {r: z_w}, gkcp).
    Degenerate components are NaN in the per-component arrays and contribute
    zero to the scan value; splits with no live component get gkcp = -inf so
    maxima ignore them.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        D = 2.0 * L - g.R0
        z_d = np.where(sm.valid_d, (D - sm.mean_d) / sm.sd_d, np.nan)
        z_w = {}
        for r, (gw, y) in sm.w_coef.items():
            W = gw * A - 2.0 * y * L + y * g.R0
            z_w[r] = np.where(sm.valid_w[r],
                              (W - sm.mean_w[r]) / sm.sd_w[r], np.nan)
        gkcp = (np.where(sm.valid_d, np.nan_to_num(z_d, nan=0.0), 0.0) ** 2
                + np.where(sm.valid_w[1.0], np.nan_to_num(z_w[1.0], nan=0.0), 0.0) ** 2)
    gkcp = np.where(sm.valid, gkcp, -np.inf)
    return z_d, z_w, gkcp


@dataclass
class ScanProfile:
    """Per-split values of every statistic over the scan window."""

    n: int
    n0: int
    n1: int
    t: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma_cross: np.ndarray
    mmd_u: np.ndarray
    d: np.ndarray
    w: dict
    z_d: np.ndarray
    z_w: dict
    gkcp: np.ndarray
    gkcp_quad: np.ndarray
    quad_fallback: np.ndarray
    valid: np.ndarray
    argmax_t: int = 0
    max_gkcp: float = float("nan")


def scan_single(g: GramSummary, n0: int | None = None, n1: int | None = None,
                r_list=DEFAULT_R_LIST) -> ScanProfile:
    """Full single-split scan profile with the maximizer.

    The scan value is computed both as Z_D^2 + Z_{W,1}^2 and through the
    2x2 Mahalanobis form on (alpha, beta); the two agree to rounding
    whenever the covariance is nonsingular, and the quadratic path falls
    back to the Z-form where its determinant underflows the guard.
    Ties at the maximum break toward the smallest t.
    """
    if n0 is None or n1 is None:
        d0, d1 = default_bounds(g.n)
        n0 = d0 if n0 is None else n0
        n1 = d1 if n1 is None else n1
    sm = scan_moments(g, n0, n1, r_list)
    A_full, L_full = prefix_stats(g)
    t = sm.t
    A, L = A_full[t - 1], L_full[t - 1]
    z_d, z_w_all, gkcp = z_stats(g, sm, A, L)

    n = g.n
    m = n - t
    t2 = (t * (t - 1)).astype(float)
    m2 = (m * (m - 1)).astype(float)
    B = g.R0 - 2.0 * L + A
    alpha = A / t2
    beta = B / m2
    gamma_cross = (g.R0 - A - B) / (2.0 * t * m)
    mmd_u = alpha + beta - 2.0 * gamma_cross
    D = 2.0 * L - g.R0
    w_vals = {r: gw * A - 2.0 * y * L + y * g.R0 for r, (gw, y) in sm.w_coef.items()}

    # Quadratic-form path with closed-form 2x2 inverse, evaluated on the
    # centered within-group totals (the same value as on (alpha, beta): the
    # form is invariant under the per-coordinate rescaling).
    va, vb, cab = moments.ab_total_moments(g, t)
    det = va * vb - cab**2
    da = A - t2 * g.kbar
    db = B - m2 * g.kbar
    ok = det > _DET_GUARD * np.maximum(va * vb, 1e-300)
    with np.errstate(invalid="ignore", divide="ignore"):
        quad = (vb * da**2 - 2.0 * cab * da * db + va * db**2) / det
    quad = np.where(ok & sm.valid, quad, gkcp)
    quad_fallback = ~ok

    z_w = {float(r): z_w_all[float(r)] for r in r_list}
    w_out = {float(r): w_vals[float(r)] for r in r_list}
    prof = ScanProfile(n=n, n0=n0, n1=n1, t=t, alpha=alpha, beta=beta,
                       gamma_cross=gamma_cross, mmd_u=mmd_u, d=D, w=w_out,
                       z_d=z_d, z_w=z_w, gkcp=gkcp, gkcp_quad=quad,
                       quad_fallback=quad_fallback, valid=sm.valid)
    i = int(np.argmax(gkcp))  # first occurrence = smallest t on ties
    prof.argmax_t = int(t[i])
    prof.max_gkcp = float(gkcp[i])
    return prof


def mmd_u_scan(g: GramSummary, n0: int | None = None, n1: int | None = None) -> np.ndarray:
    """Unbiased squared-MMD profile alpha(t) + beta(t) - 2 gamma(t).

    Provided for comparison plots; the scan tests do not use it. Needs no
    null moments, so it works on degenerate kernels too.
    """
    if n0 is None or n1 is None:
        d0, d1 = default_bounds(g.n)
        n0 = d0 if n0 is None else n0
        n1 = d1 if n1 is None else n1
    _check_bounds(g.n, n0, n1)
    t = np.arange(n0, n1 + 1)
    A_full, L_full = prefix_stats(g)
    A, L = A_full[t - 1], L_full[t - 1]
    B = g.R0 - 2.0 * L + A
    m = g.n - t
    alpha = A / (t * (t - 1.0))
    beta = B / (m * (m - 1.0))
    gamma_cross = (g.R0 - A - B) / (2.0 * t * m)
    return alpha + beta - 2.0 * gamma_cross


@dataclass
class IntervalScanProfile:
    """Scan over intervals (t1, t2], flattened over all admissible windows."""

    n: int
    n0: int
    n1: int
    t1: np.ndarray
    t2: np.ndarray
    z_d: np.ndarray
    z_w: dict
    gkcp: np.ndarray
    argmax_interval: tuple = (0, 0)
    max_gkcp: float = float("nan")


def interval_window_range(n: int, n0: int, n1: int) -> tuple[int, int]:
    lo = max(2, n0)
    hi = min(n1, n - 2)
    if lo > hi:
        raise DegenerateSplit(f"no admissible interval lengths in [{n0}, {n1}]")
    return lo, hi


def scan_interval(g: GramSummary, n0: int | None = None, n1: int | None = None,
                  r_list=DEFAULT_R_LIST) -> IntervalScanProfile:
    """Interval scan: group 1 is the inside of (t1, t2].

    The statistics depend on the window only through its length m = t2 - t1
    and its kernel totals, so the single-split moments at t = m are reused
    for every placement of the window.
    """
    n = g.n
    if n0 is None or n1 is None:
        d0, d1 = default_bounds(n)
        n0 = d0 if n0 is None else n0
        n1 = d1 if n1 is None else n1
    lo, hi = interval_window_range(n, n0, n1)
    sm = scan_moments(g, lo, hi, r_list)
    T2, diag_cum, ccum = _interval_prefix(g.k, g.c)

    t1_list, t2_list, zd_list, gk_list = [], [], [], []
    zw_list = {float(r): [] for r in r_list}
    for j, m in enumerate(sm.t):
        A, L, starts = _interval_al(n, int(m), T2, diag_cum, ccum)
        sm_j = _slice_moments(sm, j)
        z_d, z_w_all, gkcp = z_stats(g, sm_j, A, L)
        t1_list.append(starts)
        t2_list.append(starts + int(m))
        zd_list.append(z_d)
        gk_list.append(gkcp)
        for r in zw_list:
            zw_list[r].append(z_w_all[r])
    t1 = np.concatenate(t1_list)
    t2 = np.concatenate(t2_list)
    gkcp = np.concatenate(gk_list)
    prof = IntervalScanProfile(n=n, n0=n0, n1=n1, t1=t1, t2=t2,
                               z_d=np.concatenate(zd_list),
                               z_w={r: np.concatenate(v) for r, v in zw_list.items()},
                               gkcp=gkcp)
    i = int(np.argmax(gkcp))
    prof.argmax_interval = (int(t1[i]), int(t2[i]))
    prof.max_gkcp = float(gkcp[i])
    return prof


def _interval_prefix(k: np.ndarray, c: np.ndarray):
    n = k.shape[0]
    T2 = np.zeros((n + 1, n + 1))
    T2[1:, 1:] = k.cumsum(axis=0).cumsum(axis=1)
    diag_cum = np.concatenate([[0.0], np.cumsum(np.diagonal(k))])
    ccum = np.concatenate([[0.0], np.cumsum(c)])
    return T2, diag_cum, ccum


def _interval_al(n: int, m: int, T2, diag_cum, ccum):
    """A and L of every window (t1, t1+m]; t1 = 0..n-m."""
    starts = np.arange(0, n - m + 1)
    ends = starts + m
    block = T2[ends, ends] - 2.0 * T2[starts, ends] + T2[starts, starts]
    A = block - (diag_cum[ends] - diag_cum[starts])
    L = ccum[ends] - ccum[starts]
    return A, L, starts


def _slice_moments(sm: ScanMoments, j: int) -> ScanMoments:
    return ScanMoments(
        t=sm.t[j:j + 1],
        mean_d=sm.mean_d[j:j + 1], sd_d=sm.sd_d[j:j + 1],
        valid_d=sm.valid_d[j:j + 1],
        w_coef={r: (gw[j:j + 1], y[j:j + 1]) for r, (gw, y) in sm.w_coef.items()},
        mean_w={r: v[j:j + 1] for r, v in sm.mean_w.items()},
        sd_w={r: v[j:j + 1] for r, v in sm.sd_w.items()},
        valid_w={r: v[j:j + 1] for r, v in sm.valid_w.items()},
        valid=sm.valid[j:j + 1],
    )
