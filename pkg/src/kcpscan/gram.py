"""Gaussian-kernel gram matrix and the permutation-invariant aggregates.

Everything downstream (null moments, scans, analytic tails) is a function of a
handful of sums over the kernel matrix. They are computed once here, in O(n^2)
plus one matrix product, and cached on an immutable :class:`GramSummary` that
is safe to share across workers.

Two aggregate bundles are kept: one over the raw kernel (means, the classical
R0..R3) and one over the grand-centered kernel k_ij - kbar. Central moments
of every split statistic are identical under the shift but the centered sums
avoid the catastrophic cancellation that raw fourth-scale totals produce near
the window ends.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AllPointsIdentical, DegenerateSplit, NonFiniteKernel


@dataclass(frozen=True)
class Sequence:
    """Time-ordered multivariate observations, one row per time point."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise ValueError("sequence must be a 2-d array (n observations x d coordinates)")
        if v.shape[0] < 4:
            raise ValueError("need at least 4 observations")
        if not np.all(np.isfinite(v)):
            raise ValueError("sequence contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


def as_sequence(x) -> Sequence:
    return x if isinstance(x, Sequence) else Sequence(np.asarray(x, dtype=float))


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, clipped at zero against rounding."""
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def median_heuristic(seq) -> float:
    """Median of the n(n-1)/2 pairwise Euclidean distances.

    Deterministic: for an even count the two middle order statistics are
    averaged. Zero distances are kept; only an all-zero median raises.
    """
    seq = as_sequence(seq)
    d2 = pairwise_sq_dists(seq.values)
    iu = np.triu_indices(seq.n, k=1)
    med = float(np.median(np.sqrt(d2[iu])))
    if med <= 0.0:
        raise AllPointsIdentical("median pairwise distance is zero")
    return med


@dataclass(frozen=True)
class Aggregates:
    """Pattern sums of one (possibly centered) off-diagonal kernel matrix.

    c: row sums; R0 = sum c; R1 = sum k^2; Sc2/Sc3: power sums of c;
    Scs2 = sum_i c_i (row i sum of k^2); cKc = c' K c; tr3 = trace(K^3);
    T1 = sum k^3. R2, R3 follow from the row-sum identities.
    """

    c: np.ndarray
    R0: float
    R1: float
    R2: float
    R3: float
    Sc2: float
    Sc3: float
    Scs2: float
    cKc: float
    tr3: float
    T1: float


def _aggregates(koff: np.ndarray, exact_zero_r0: bool = False) -> Aggregates:
    c = koff.sum(axis=1)
    # np.sum is a pairwise-tree reduction; the cancellation-prone R3
    # combination goes through math.fsum.
    R0 = 0.0 if exact_zero_r0 else float(c.sum())
    R1 = float((koff**2).sum())
    Sc2 = float((c**2).sum())
    R2 = Sc2 - R1
    R3 = math.fsum((R0 * R0, -2.0 * R1, -4.0 * R2))
    return Aggregates(
        c=c, R0=R0, R1=R1, R2=R2, R3=R3, Sc2=Sc2,
        Sc3=float((c**3).sum()),
        Scs2=float((c * (koff**2).sum(axis=1)).sum()),
        cKc=float(c @ koff @ c),
        tr3=float(((koff @ koff) * koff).sum()),
        T1=float((koff**3).sum()),
    )


@dataclass(frozen=True)
class GramSummary:
    """Kernel matrix plus every aggregate the moment formulas consume.

    ``k`` stores the full matrix (unit diagonal for the Gaussian kernel); all
    aggregates exclude the diagonal. ``raw``/``cen`` are the aggregate
    bundles of the raw and grand-centered kernels; the classical R0..R3 and
    the centered row sums are mirrored as named fields.
    """

    k: np.ndarray
    bandwidth: float
    n: int
    kbar: float
    R0: float
    R1: float
    R2: float
    R3: float
    ktilde_rowsum: np.ndarray
    raw: Aggregates = field(repr=False, default=None)
    cen: Aggregates = field(repr=False, default=None)

    @property
    def c(self) -> np.ndarray:
        return self.raw.c

    def check_split(self, t: int) -> None:
        if not 2 <= t <= self.n - 2:
            raise DegenerateSplit(f"split t={t} outside [2, {self.n - 2}]")


def gram_from_kernel(k: np.ndarray, bandwidth: float = float("nan")) -> GramSummary:
    """Build a :class:`GramSummary` from an explicit symmetric kernel matrix.

    Accepts matrices with arbitrary diagonal (the diagonal never enters any
    statistic). Used directly by the CLI's precomputed-gram input mode.
    """
    k = np.asarray(k, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError("kernel matrix must be square")
    n = k.shape[0]
    if n < 4:
        raise ValueError("need at least 4 observations")
    if not np.all(np.isfinite(k)):
        raise NonFiniteKernel("kernel matrix has non-finite entries")
    if not np.allclose(k, k.T, atol=1e-10):
        raise ValueError("kernel matrix must be symmetric")
    k = 0.5 * (k + k.T)

    koff = k.copy()
    np.fill_diagonal(koff, 0.0)
    raw = _aggregates(koff)
    kbar = raw.R0 / (n * (n - 1))
    koff -= kbar
    np.fill_diagonal(koff, 0.0)
    cen = _aggregates(koff, exact_zero_r0=True)
    return GramSummary(
        k=k, bandwidth=float(bandwidth), n=n, kbar=kbar,
        R0=raw.R0, R1=raw.R1, R2=raw.R2, R3=raw.R3,
        ktilde_rowsum=cen.c, raw=raw, cen=cen,
    )


def build_gram(seq, bandwidth: float | None = None) -> GramSummary:
    """Gaussian kernel k(x, y) = exp(-||x-y||^2 / (2 h^2)) with aggregates.

    ``bandwidth`` defaults to the median heuristic. R2 and R3 come from the
    row-sum identities (R2 = sum_i c_i^2 - R1, R3 = R0^2 - 2 R1 - 4 R2);
    nothing here is more expensive than one n x n matrix product.
    """
    seq = as_sequence(seq)
    if bandwidth is None:
        bandwidth = median_heuristic(seq)
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    d2 = pairwise_sq_dists(seq.values)
    k = np.exp(-d2 / (2.0 * bandwidth * bandwidth))
    if not np.all(np.isfinite(k)):
        raise NonFiniteKernel("kernel matrix has non-finite entries")
    np.fill_diagonal(k, 1.0)
    return gram_from_kernel(k, bandwidth=float(bandwidth))
