"""Exact permutation-null moments of the split statistics.

Under the permutation null every statistic here is a polynomial in the group
membership indicators, so its exact moments reduce to sums over the distinct
index-coincidence patterns of the kernel aggregates, weighted by falling
factorial ratios t_(a)/n_(a) (the chance that a specific set of ``a`` distinct
positions all land in the first group).

Two building blocks cover everything:

- ``A(t)``: the within-group-1 kernel total over ordered pairs,
  A(t) = t(t-1) alpha(t), a quadratic form in the indicators;
- ``L(t)``: the group-1 sum of kernel row sums, a linear statistic.

The difference statistic is linear, D(t) = A - B = 2 L(t) - R0, which makes
its whole correlation structure kernel-free. The weighted statistic

    W_r(t) = [r (n-t-1) A(t) + (t-1) B(t)] / (n-2)

uses the unique weighting (up to scale) for which cov(D, W_1) = 0 for every
kernel, so the Mahalanobis scan value decomposes exactly as Z_D^2 + Z_{W,1}^2.

Means come from the raw aggregates in closed form; every central moment is
evaluated on the grand-centered kernel (the statistics shift by split-wise
constants, leaving central moments unchanged, but the centered sums keep the
arithmetic stable at the window ends). All formulas are anchored to
exhaustive subset enumeration for n <= 8 in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSplit, ZeroVariance
from .gram import Aggregates, GramSummary

__all__ = [
    "SplitWeights",
    "NullMoments",
    "split_weights",
    "alpha_beta_moments",
    "dw_moments",
    "third_moments",
    "cross_correlation",
]


def _falling(x, j: int):
    """x (x-1) ... (x-j+1), elementwise; j = 0 gives 1."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    for i in range(j):
        out = out * (x - i)
    return out


def _probs(n: int, t, amax: int):
    """P[a] = t_(a) / n_(a) for a = 0..amax."""
    t = np.asarray(t, dtype=float)
    return [_falling(t, a) / _falling(float(n), a) for a in range(amax + 1)]


@dataclass(frozen=True)
class SplitWeights:
    """Hypergeometric pair/triple/quadruple probabilities at split t."""

    t: int
    p1: float
    p2: float
    p3: float
    q1: float
    q2: float
    q3: float


def split_weights(n: int, t: int) -> SplitWeights:
    m = n - t
    p = _probs(n, t, 4)
    q = _probs(n, m, 4)
    return SplitWeights(t=t, p1=float(p[2]), p2=float(p[3]), p3=float(p[4]),
                        q1=float(q[2]), q2=float(q[3]), q3=float(q[4]))


@dataclass
class NullMoments:
    """Null moments at one split; fields are filled by the op that computes them."""

    t: int
    mean_alpha: float | None = None
    mean_beta: float | None = None
    var_alpha: float | None = None
    var_beta: float | None = None
    cov_ab: float | None = None
    mean_D: float | None = None
    var_D: float | None = None
    mean_Wr: float | None = None
    var_Wr: float | None = None
    skew_D: float | None = None
    skew_Wr: float | None = None
    r: float | None = None


# ---------------------------------------------------------------------------
# vectorized internals (t may be an integer array)
# ---------------------------------------------------------------------------

def w_weights(n: int, t, r: float):
    """Coefficients (g, y) of W_r = g A - 2 y L + y R0 at split(s) t."""
    t = np.asarray(t, dtype=float)
    x = r * (n - t - 1) / (n - 2)
    y = (t - 1) / (n - 2)
    return x + y, y


def _cen_moments(agg: Aggregates, n: int, t, third: bool = False):
    """Central moments of (A, L) from centered aggregates (R0 = 0).

    With the grand-centered kernel the subset means of A and L vanish, so
    the raw pattern sums below are already central. Keys: vA, vL, cAL and,
    with ``third``, the third-order m3A, m21 (= E[A^2 L]), m12, m3L.
    """
    R1, R2, R3 = agg.R1, agg.R2, agg.R3
    Sc2, Sc3, Scs2, cKc, tr3, T1 = (agg.Sc2, agg.Sc3, agg.Scs2, agg.cKc,
                                    agg.tr3, agg.T1)
    P = _probs(n, t, 6 if third else 4)
    out = {
        "vL": Sc2 * P[1] - Sc2 * P[2],
        "vA": 2 * R1 * P[2] + 4 * R2 * P[3] + R3 * P[4],
        "cAL": 2 * Sc2 * P[2] - 2 * Sc2 * P[3],
    }
    if not third:
        return out

    out["m3L"] = Sc3 * P[1] + 3 * (0.0 - Sc3) * P[2] + (2 * Sc3) * P[3]

    # E[A^3]: three ordered pairs grouped by coincidence pattern; tot_a is
    # the total kernel-product weight of the patterns on a distinct indices.
    U2 = Scs2 - T1                                   # doubled edge + adjacent edge
    T3 = -4 * Scs2 + 2 * T1                          # doubled edge + disjoint edge
    star = 8 * (Sc3 - 3 * Scs2 + 2 * T1)             # 3 edges at one center (x48)
    path = cKc - 2 * Scs2 + T1 - tr3                 # 3-edge path, 4 indices
    cherry_far = (-(Sc3 - Scs2) - 2 * (cKc - Scs2)
                  + 2 * (Scs2 - T1) + tr3)           # 2 adjacent + 1 disjoint
    tot2 = 4 * T1
    tot3 = 24 * U2 + 8 * tr3
    tot4 = 6 * T3 + star + 24 * path
    tot5 = 24 * cherry_far
    tot6 = -(tot2 + tot3 + tot4 + tot5)
    out["m3A"] = tot2 * P[2] + tot3 * P[3] + tot4 * P[4] + tot5 * P[5] + tot6 * P[6]

    # E[A^2 L]: two ordered pairs and one weighted vertex.
    c1 = 4 * Scs2
    c2 = -4 * Scs2
    c3 = 4 * (Sc3 - Scs2)
    c4 = 8 * (cKc - Scs2)
    c5 = 8 * (-(Sc3 - Scs2) / 2 - (cKc - Scs2))
    c6 = -8 * Sc3 - 8 * cKc + 8 * Scs2
    c7 = -c6
    out["m21"] = c1 * P[2] + (c2 + c3 + c4) * P[3] + (c5 + c6) * P[4] + c7 * P[5]

    # E[A L^2]: one ordered pair and two weighted vertices.
    d1 = 2 * Sc3
    d2 = -2 * Sc3
    d3 = 2 * cKc
    d4 = -4 * Sc3 - 4 * cKc
    d5 = 4 * Sc3 + 2 * cKc
    out["m12"] = (d1 + d3) * P[2] + (d2 + d4) * P[3] + d5 * P[4]
    return out


def alpha_beta_arrays(g: GramSummary, t):
    """Means, variances and covariance of (alpha, beta); vectorized over t."""
    n = g.n
    t = np.asarray(t)
    m = n - t
    t2 = _falling(t, 2)
    m2 = _falling(m, 2)
    mt = _cen_moments(g.cen, n, t)
    mm = _cen_moments(g.cen, n, m)
    cov_tot = t2 * m2 * g.cen.R3 / _falling(float(n), 4)
    var_a = mt["vA"] / t2**2
    var_b = mm["vA"] / m2**2
    cov_ab = cov_tot / (t2 * m2)
    return g.kbar, var_a, var_b, cov_ab + np.zeros_like(var_a)


def ab_total_moments(g: GramSummary, t):
    """Central (A, B) second moments: var A, var B, cov(A, B); stable basis
    for the 2x2 quadratic-form scan value."""
    n = g.n
    t = np.asarray(t)
    m = n - t
    vA = _cen_moments(g.cen, n, t)["vA"]
    vB = _cen_moments(g.cen, n, m)["vA"]
    cov = _falling(t, 2) * _falling(m, 2) * g.cen.R3 / _falling(float(n), 4)
    return vA, vB, cov + np.zeros_like(vA)


def d_moments(g: GramSummary, t):
    """Mean and variance of D(t) = 2 L(t) - R0; vectorized over t."""
    n = g.n
    t = np.asarray(t, dtype=float)
    mean = g.R0 * (2 * t - n) / n
    var = 4.0 * t * (n - t) * g.cen.Sc2 / (n * (n - 1))
    return mean, var


def w_moments(g: GramSummary, t, r: float):
    """Mean and variance of W_r(t); vectorized over t."""
    n = g.n
    gw, y = w_weights(n, t, r)
    P = _probs(n, t, 2)
    mean = g.R0 * (gw * P[2] - 2 * y * P[1] + y)
    mom = _cen_moments(g.cen, n, t)
    var = gw**2 * mom["vA"] - 4 * gw * y * mom["cAL"] + 4 * y**2 * mom["vL"]
    return mean, var


def skewness_d(g: GramSummary, t):
    """Exact standardized third moment of D(t); vectorized over t."""
    mom = _cen_moments(g.cen, g.n, t, third=True)
    var = 4.0 * mom["vL"]
    _check_positive_var(g, var)
    return 8.0 * mom["m3L"] / var**1.5


def skewness_w(g: GramSummary, t, r: float):
    """Exact standardized third moment of W_r(t); vectorized over t."""
    gw, y = w_weights(g.n, t, r)
    mom = _cen_moments(g.cen, g.n, t, third=True)
    mu3 = (gw**3 * mom["m3A"] - 6 * gw**2 * y * mom["m21"]
           + 12 * gw * y**2 * mom["m12"] - 8 * y**3 * mom["m3L"])
    var = gw**2 * mom["vA"] - 4 * gw * y * mom["cAL"] + 4 * y**2 * mom["vL"]
    _check_positive_var(g, var)
    return mu3 / var**1.5


def _check_positive_var(g: GramSummary, var) -> None:
    if np.any(np.asarray(var) <= 1e-14 * g.cen.R1 + 1e-300):
        raise ZeroVariance("statistic has (numerically) zero null variance")


def rho_d(n: int, s, t):
    """Exact correlation of (Z_D(s), Z_D(t)) for s <= t; kernel-free."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.sqrt(s * (n - t) / ((n - s) * t))


def _nested_cen(g: GramSummary, s, t):
    """Central cross moments of (A_s, L_s, A_t, L_t), nested groups s <= t,
    from the centered aggregates."""
    n = g.n
    agg = g.cen
    R1, R2, R3, Sc2 = agg.R1, agg.R2, agg.R3, agg.Sc2
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    p2s = _falling(s, 2) / _falling(float(n), 2)
    cLL = Sc2 * (s / n) - Sc2 * (s / n) * (t - 1) / (n - 1)
    cLA = (2 * Sc2 * (s / n) * (t - 1) / (n - 1)
           - 2 * Sc2 * (s / n) * (t - 1) * (t - 2) / ((n - 1) * (n - 2)))
    cAL = 2 * Sc2 * p2s - 2 * Sc2 * p2s * (t - 2) / (n - 2)
    cAA = (2 * R1 * p2s + 4 * R2 * p2s * (t - 2) / (n - 2)
           + R3 * p2s * (t - 2) * (t - 3) / ((n - 2) * (n - 3)))
    return cLL, cLA, cAL, cAA


def cross_cov_w(g: GramSummary, s, t, r: float):
    """Exact cov(W_r(s), W_r(t)) for s <= t; vectorized elementwise."""
    cLL, cLA, cAL, cAA = _nested_cen(g, s, t)
    gs, ys = w_weights(g.n, s, r)
    gt, yt = w_weights(g.n, t, r)
    return gs * gt * cAA - 2 * gs * yt * cAL - 2 * ys * gt * cLA + 4 * ys * yt * cLL


def rho_w(g: GramSummary, s, t, r: float):
    """Exact correlation of (Z_{W,r}(s), Z_{W,r}(t)) for s <= t."""
    _, vs = w_moments(g, s, r)
    _, vt = w_moments(g, t, r)
    _check_positive_var(g, vs)
    _check_positive_var(g, vt)
    return cross_cov_w(g, s, t, r) / np.sqrt(vs * vt)


# ---------------------------------------------------------------------------
# scalar operations
# ---------------------------------------------------------------------------

def alpha_beta_moments(g: GramSummary, t: int) -> NullMoments:
    """Means, variances and covariance of (alpha(t), beta(t)) under the
    permutation null."""
    g.check_split(t)
    kbar, va, vb, cab = alpha_beta_arrays(g, np.asarray([t]))
    return NullMoments(t=t, mean_alpha=kbar, mean_beta=kbar,
                       var_alpha=float(va[0]), var_beta=float(vb[0]),
                       cov_ab=float(cab[0]))


def dw_moments(g: GramSummary, t: int, r: float) -> NullMoments:
    """Means and variances of D(t) and W_r(t)."""
    g.check_split(t)
    nm = alpha_beta_moments(g, t)
    md, vd = d_moments(g, np.asarray([t]))
    mw, vw = w_moments(g, np.asarray([t]), r)
    nm.mean_D, nm.var_D = float(md[0]), float(vd[0])
    nm.mean_Wr, nm.var_Wr = float(mw[0]), float(vw[0])
    nm.r = r
    return nm


def third_moments(g: GramSummary, t: int, r: float) -> tuple[float, float]:
    """Standardized third moments (skew of D(t), skew of W_r(t))."""
    g.check_split(t)
    sd = skewness_d(g, np.asarray([t]))
    sw = skewness_w(g, np.asarray([t]), r)
    return float(sd[0]), float(sw[0])


def cross_correlation(g: GramSummary, s: int, t: int, r: float) -> tuple[float, float]:
    """Exact null correlations of (Z_D(s), Z_D(t)) and (Z_{W,r}(s), Z_{W,r}(t))."""
    g.check_split(s)
    if not s < t <= g.n - 1:
        raise DegenerateSplit(f"need s < t <= n-1, got s={s}, t={t}")
    rd = float(rho_d(g.n, s, t))
    rw = float(rho_w(g, np.asarray([s]), np.asarray([t]), r)[0])
    return rd, rw
