"""Synthetic sequence generators for the benchmark studies.

All families share the AR(1)-style coordinate covariance Sigma_ij = 0.4^|i-j|
and place a single change at tau: rows 1..tau from the base distribution,
rows tau+1..n from the shifted/scaled one. Delta is the Euclidean norm of the
mean shift; sigma2 scales the covariance of the post-change block.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidSpec
from .gram import Sequence

FAMILIES = ("gaussian_type1", "gaussian_type2", "chi_square", "log_normal",
            "multivariate_t")

_AR_RHO = 0.4
_sqrt_cache: dict[int, np.ndarray] = {}


def ar1_covariance(d: int, rho: float = _AR_RHO) -> np.ndarray:
    idx = np.arange(d)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def sigma_half(d: int) -> np.ndarray:
    """Symmetric square root of the AR(1) covariance, cached per dimension."""
    if d not in _sqrt_cache:
        w, v = np.linalg.eigh(ar1_covariance(d))
        _sqrt_cache[d] = (v * np.sqrt(np.maximum(w, 0.0))) @ v.T
    return _sqrt_cache[d]


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    d: int
    n: int
    tau: int | None = None        # None: no change (size studies)
    delta: float = 0.0            # Euclidean norm of the mean shift
    sigma2: float = 1.0           # post-change covariance multiplier
    df: int = 5                   # multivariate_t degrees of freedom
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}")
        if self.n < 4 or self.d < 1:
            raise InvalidSpec("need n >= 4 and d >= 1")
        if self.tau is not None and not 1 <= self.tau < self.n:
            raise InvalidSpec("tau must be in [1, n-1]")
        if self.delta < 0 or self.sigma2 <= 0 or self.df < 1:
            raise InvalidSpec("need delta >= 0, sigma2 > 0, df >= 1")


def _mean_shift(spec: GeneratorSpec) -> np.ndarray:
    """Shift vector with the requested Euclidean norm."""
    d = spec.d
    if spec.family == "gaussian_type2":
        # half zeros, half ones
        nu = np.zeros(d)
        nu[d - d // 2:] = 1.0
        n_ones = max(d // 2, 1)
        return (spec.delta / np.sqrt(n_ones)) * nu
    return np.full(d, spec.delta / np.sqrt(d))


def _draw(spec: GeneratorSpec, rng, rows: int, shifted: bool) -> np.ndarray:
    d = spec.d
    half = sigma_half(d)
    scale = np.sqrt(spec.sigma2) if shifted else 1.0
    shift = _mean_shift(spec) if shifted else np.zeros(d)
    fam = spec.family
    if fam in ("gaussian_type1", "gaussian_type2"):
        z = rng.standard_normal((rows, d))
        return scale * (z @ half) + shift
    if fam == "chi_square":
        u = rng.chisquare(3, size=(rows, d))
        return scale * (u @ half) + shift
    if fam == "log_normal":
        z = rng.standard_normal((rows, d))
        return np.exp(scale * (z @ half) + shift)
    if fam == "multivariate_t":
        z = rng.standard_normal((rows, d)) @ half
        g = rng.chisquare(spec.df, size=rows) / spec.df
        x = z / np.sqrt(g)[:, None]
        return scale * x + shift
    raise InvalidSpec(fam)


def generate(spec: GeneratorSpec) -> Sequence:
    """Draw one sequence; pre-change rows first, post-change rows after tau."""
    rng = np.random.default_rng(spec.seed)
    tau = spec.n if spec.tau is None else spec.tau
    pre = _draw(spec, rng, tau, shifted=False)
    if tau == spec.n:
        return Sequence(pre)
    post = _draw(spec, rng, spec.n - tau, shifted=True)
    return Sequence(np.vstack([pre, post]))


def null_spec(spec: GeneratorSpec) -> GeneratorSpec:
    """Same family and size with the change removed."""
    return replace(spec, tau=None, delta=0.0, sigma2=1.0)


def replicate_spec(spec: GeneratorSpec, master_seed: int, k: int) -> GeneratorSpec:
    """Per-replicate spec with a seed that is a pure function of (master, k)."""
    child = int(np.random.SeedSequence((int(master_seed), int(k))).generate_state(1)[0])
    return replace(spec, seed=child)
