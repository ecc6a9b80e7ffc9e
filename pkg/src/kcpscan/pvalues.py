"""Analytic tail approximations for the scan maxima.

The crossing probability of a standardized scan process is approximated by a
sum over split points of local terms C(t) nu(b sqrt(2 C(t))), where C(t) is
the local decay rate of the process autocorrelation and nu is the discrete
boundary-crossing correction. A per-split multiplier S(t), built from the
exact third null moment, corrects the Gaussian marginal for skewness; where
the saddlepoint argument breaks down (1 + 2 gamma b <= 0, near the window
ends for heavily skewed data) theta_hat is filled in by linear extrapolation
from the two nearest well-defined splits.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import norm

from . import moments
from .errors import ConfigError, DegenerateSplit
from .gram import GramSummary

__all__ = [
    "TailApproxConfig",
    "PValueReport",
    "nu",
    "c_derivative",
    "pval_single_zd",
    "pval_single_zw",
    "pval_interval_zd",
    "pval_interval_zw",
    "skewness_correct",
    "critical_value",
]

EXACT_DISCRETE = "exact-discrete"
ASYMPTOTIC = "asymptotic-closed-form"
_MODE_ALIASES = {
    "exact": EXACT_DISCRETE, EXACT_DISCRETE: EXACT_DISCRETE,
    "asymptotic": ASYMPTOTIC, ASYMPTOTIC: ASYMPTOTIC,
}


@dataclass(frozen=True)
class TailApproxConfig:
    """Settings shared by the analytic approximations."""

    n0: int
    n1: int
    skewness_correction: bool = True
    derivative_mode: str = EXACT_DISCRETE

    def __post_init__(self):
        if self.n0 > self.n1:
            raise DegenerateSplit(f"n0={self.n0} exceeds n1={self.n1}")
        object.__setattr__(self, "derivative_mode",
                           _MODE_ALIASES[self.derivative_mode])


@dataclass
class PValueReport:
    """Approximated tail probability plus per-split diagnostics."""

    b: float
    kind: str                       # single_zd | single_zw | interval_zd | interval_zw
    p_base: float
    p_skew: float | None = None
    r: float | None = None
    t: np.ndarray | None = None
    c_values: np.ndarray | None = None
    nu_values: np.ndarray | None = None
    s_values: np.ndarray | None = None
    theta_values: np.ndarray | None = None
    extrapolated: np.ndarray | None = None
    dropped: np.ndarray | None = None
    all_skew_invalid: bool = False

    @property
    def p(self) -> float:
        return self.p_base if self.p_skew is None else self.p_skew


def nu(s):
    """Discrete boundary-crossing correction; nu(0) = 1, decreasing in s."""
    s = np.asarray(s, dtype=float)
    out = np.ones_like(s)
    big = s >= 1e-8
    sb = s[big] / 2.0
    out[big] = ((2.0 / s[big]) * (norm.cdf(sb) - 0.5)
                / (sb * norm.cdf(sb) + norm.pdf(sb)))
    return out if out.ndim else float(out)


def rho_star_d(u, v):
    """Closed-form limit correlation of the standardized difference process."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    return np.sqrt(lo * (1 - hi) / ((1 - lo) * hi))


def rho_star_w(u, v, r: float, R1: float, R2: float):
    """Closed-form limit correlation of the standardized weighted process."""
    u, v = np.asarray(u, float), np.asarray(v, float)
    lo, hi = np.minimum(u, v), np.maximum(u, v)

    def sig(x):
        return np.sqrt(2 * R1 * (r * (1 - x) + x) ** 2
                       + (4 * R1 + 4 * R2) * x * (1 - x) * (r - 1) ** 2)

    num = (2 * R1 * (r * r * lo * (1 - lo) * (1 - hi**2))
           + 2 * R1 * (r * (hi - 1) * (3 * u * v - lo**2 * (2 * hi + 1)))
           + 2 * R1 * (u * v * (2 - lo) * (1 - hi))
           + 4 * R2 * u * v * (1 - u) * (1 - v) * (r - 1) ** 2)
    return num / (hi * (1 - lo) * sig(u) * sig(v))


def _c_d(n: int, t: np.ndarray, mode: str) -> np.ndarray:
    if mode == EXACT_DISCRETE:
        return 1.0 - moments.rho_d(n, t, t + 1)
    x = t / n
    return 1.0 / (2.0 * x * (1.0 - x) * n)


def _c_w(g: GramSummary, t: np.ndarray, r: float, mode: str) -> np.ndarray:
    if mode == EXACT_DISCRETE:
        # Forward difference, except at t = n-2 where the statistic at t+1
        # is degenerate (single-point complement); step backward there.
        s = np.where(t + 1 <= g.n - 2, t, t - 1)
        return 1.0 - moments.rho_w(g, s, s + 1, r)
    # One-sided difference toward the diagonal: the limit correlation has a
    # kink at u = v, and the inward slope is the defined derivative.
    delta = 1e-6
    x = t / g.n
    h = (1.0 - rho_star_w(x - delta, x, r, g.R1, g.R2)) / delta
    return h / g.n


def c_derivative(g: GramSummary, t: int, r: float,
                 mode: str = EXACT_DISCRETE) -> tuple[float, float]:
    """Local autocorrelation decay (C_D(t), C_{W,r}(t)) at one split."""
    g.check_split(t)
    mode = _MODE_ALIASES[mode]
    ta = np.asarray([t])
    return float(_c_d(g.n, ta, mode)[0]), float(_c_w(g, ta, r, mode)[0])


def _skew_factors(gamma: np.ndarray, b: float):
    """Per-split multipliers S(t) with the extrapolation fix.

    Splits where 1 + 2 gamma b <= 0 get theta_hat linearly extrapolated from
    the two nearest valid splits; any split whose resulting S-denominator is
    non-positive contributes S = 0 and is flagged as dropped.
    """
    gamma = np.asarray(gamma, float)
    nt = len(gamma)
    disc = 1.0 + 2.0 * gamma * b
    valid = disc > 0
    theta = np.full(nt, np.nan)
    small = np.abs(gamma) < 1e-12
    theta[valid & small] = b
    sel = valid & ~small
    theta[sel] = (np.sqrt(disc[sel]) - 1.0) / gamma[sel]

    extrapolated = ~valid
    if (~valid).any():
        vi = np.flatnonzero(valid)
        if len(vi) == 0:
            return np.zeros(nt), theta, extrapolated, np.ones(nt, bool), True
        for j in np.flatnonzero(~valid):
            near = vi[np.argsort(np.abs(vi - j), kind="stable")[:2]]
            if len(near) == 1 or near[0] == near[1]:
                theta[j] = theta[near[0]]
            else:
                i0, i1 = sorted(near)
                slope = (theta[i1] - theta[i0]) / (i1 - i0)
                theta[j] = theta[i0] + slope * (j - i0)

    den = 1.0 + gamma * theta
    ok = np.isfinite(theta) & (den > 0)
    S = np.zeros(nt)
    with np.errstate(over="ignore"):
        S[ok] = (np.exp(0.5 * (b - theta[ok]) ** 2 + gamma[ok] * theta[ok] ** 3 / 6.0)
                 / np.sqrt(den[ok]))
    S[~np.isfinite(S)] = 0.0
    dropped = ~ok
    return S, theta, extrapolated, dropped, False


def _assemble(b: float, kind: str, r, t, C, base_weight, prefactor,
              gamma=None, two_sided_gamma=False):
    """Shared tail-sum assembly for the four approximation variants."""
    nuv = nu(b * np.sqrt(2.0 * C))
    base_terms = base_weight * C * nuv
    p_base = float(np.clip(prefactor * base_terms.sum(), 0.0, 1.0))
    rep = PValueReport(b=b, kind=kind, p_base=p_base, r=r, t=t,
                       c_values=C, nu_values=nuv)
    if gamma is None:
        return rep
    if two_sided_gamma:
        Sp, th, ex, dp, inv_p = _skew_factors(gamma, b)
        Sm, _, ex2, dp2, inv_m = _skew_factors(-gamma, b)
        S = 0.5 * (Sp + Sm)
        theta, extrap, dropped = th, ex | ex2, dp & dp2
        all_invalid = inv_p and inv_m
    else:
        S, theta, extrap, dropped, all_invalid = _skew_factors(gamma, b)
    rep.s_values, rep.theta_values = S, theta
    rep.extrapolated, rep.dropped = extrap, dropped
    rep.all_skew_invalid = bool(all_invalid)
    if all_invalid:
        rep.p_skew = p_base
    else:
        rep.p_skew = float(np.clip(prefactor * (S * base_terms).sum(), 0.0, 1.0))
    return rep


def _single_range(g, cfg):
    if not 2 <= cfg.n0 <= cfg.n1 <= g.n - 2:
        raise DegenerateSplit(f"bounds [{cfg.n0}, {cfg.n1}] outside [2, {g.n - 2}]")
    return np.arange(cfg.n0, cfg.n1 + 1)


def pval_single_zd(b: float, g: GramSummary, cfg: TailApproxConfig) -> PValueReport:
    """P(max_t |Z_D(t)| > b) over t in [n0, n1]."""
    t = _single_range(g, cfg)
    if b <= 0:
        return PValueReport(b=b, kind="single_zd", p_base=1.0,
                            p_skew=1.0 if cfg.skewness_correction else None)
    C = _c_d(g.n, t, cfg.derivative_mode)
    gamma = moments.skewness_d(g, t) if cfg.skewness_correction else None
    return _assemble(b, "single_zd", None, t, C, 1.0,
                     2.0 * b * norm.pdf(b), gamma, two_sided_gamma=True)


def _check_r(r: float) -> None:
    # the Gaussian-process limit behind the approximation requires r != 1
    if abs(r - 1.0) < 1e-9:
        raise ConfigError("weighted-statistic tail approximation needs r != 1")


def pval_single_zw(b: float, g: GramSummary, r: float,
                   cfg: TailApproxConfig) -> PValueReport:
    """P(max_t Z_{W,r}(t) > b) over t in [n0, n1]; one-sided."""
    _check_r(r)
    t = _single_range(g, cfg)
    if b <= 0:
        return PValueReport(b=b, kind="single_zw", p_base=1.0, r=r,
                            p_skew=1.0 if cfg.skewness_correction else None)
    C = _c_w(g, t, r, cfg.derivative_mode)
    gamma = moments.skewness_w(g, t, r) if cfg.skewness_correction else None
    return _assemble(b, "single_zw", r, t, C, 1.0, b * norm.pdf(b), gamma)


def _interval_lengths(g, cfg):
    lo = max(2, cfg.n0)
    hi = min(cfg.n1, g.n - 2)
    if lo > hi:
        raise DegenerateSplit(f"no admissible interval lengths in [{cfg.n0}, {cfg.n1}]")
    return np.arange(lo, hi + 1)


def pval_interval_zd(b: float, g: GramSummary, cfg: TailApproxConfig) -> PValueReport:
    """Changed-interval tail for |Z_D|; window lengths m in [n0, n1], each
    with (n - m) placements."""
    m = _interval_lengths(g, cfg)
    if b <= 0:
        return PValueReport(b=b, kind="interval_zd", p_base=1.0,
                            p_skew=1.0 if cfg.skewness_correction else None)
    C = _c_d(g.n, m, cfg.derivative_mode)
    # base term per m is (C nu)^2 (n - m): the squaring happens through
    # base_weight = (n - m) C nu times the C nu factor inside _assemble.
    nuv = nu(b * np.sqrt(2.0 * C))
    gamma = moments.skewness_d(g, m) if cfg.skewness_correction else None
    return _assemble(b, "interval_zd", None, m, C, (g.n - m) * C * nuv,
                     2.0 * b**3 * norm.pdf(b), gamma, two_sided_gamma=True)


def pval_interval_zw(b: float, g: GramSummary, r: float,
                     cfg: TailApproxConfig) -> PValueReport:
    """Changed-interval tail for Z_{W,r}; one-sided."""
    _check_r(r)
    m = _interval_lengths(g, cfg)
    if b <= 0:
        return PValueReport(b=b, kind="interval_zw", p_base=1.0, r=r,
                            p_skew=1.0 if cfg.skewness_correction else None)
    C = _c_w(g, m, r, cfg.derivative_mode)
    nuv = nu(b * np.sqrt(2.0 * C))
    gamma = moments.skewness_w(g, m, r) if cfg.skewness_correction else None
    return _assemble(b, "interval_zw", r, m, C, (g.n - m) * C * nuv,
                     b**3 * norm.pdf(b), gamma)


def skewness_correct(base: PValueReport, g: GramSummary,
                     cfg: TailApproxConfig) -> PValueReport:
    """Skewness-corrected version of a base report (same b, kind and bounds)."""
    cfg = replace(cfg, skewness_correction=True)
    fn = {
        "single_zd": lambda: pval_single_zd(base.b, g, cfg),
        "single_zw": lambda: pval_single_zw(base.b, g, base.r, cfg),
        "interval_zd": lambda: pval_interval_zd(base.b, g, cfg),
        "interval_zw": lambda: pval_interval_zw(base.b, g, base.r, cfg),
    }[base.kind]
    return fn()


def critical_value(pfun, alpha: float = 0.05, lo: float = 0.5, hi: float = 8.0,
                   tol: float = 1e-4) -> float:
    """Solve pfun(b) = alpha by bisection; pfun must be decreasing in b."""
    if pfun(hi) > alpha:
        return hi
    if pfun(lo) < alpha:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pfun(mid) > alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
