import itertools

import numpy as np
import pytest

from kcpscan.gram import build_gram


def random_sequence(rng, n, d=3):
    return rng.standard_normal((n, d))


def random_gram(rng, n, d=3):
    return build_gram(random_sequence(rng, n, d))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


class SubsetOracle:
    """Brute-force permutation-null moments by enumerating all subsets.

    Holds per-subset values of the within-group kernel total A and the
    row-sum total L for every bitmask of {0..n-1}; any split statistic is an
    affine function of (A, L), so its exact null moments are plain averages.
    Deliberately independent of the package's moment formulas.
    """

    def __init__(self, k):
        k = np.asarray(k, dtype=float)
        self.n = k.shape[0]
        koff = k.copy()
        np.fill_diagonal(koff, 0.0)
        self.k = koff
        self.c = koff.sum(axis=1)
        self.R0 = float(self.c.sum())
        size = 1 << self.n
        self.A = np.zeros(size)
        self.L = np.zeros(size)
        for mask in range(1, size):
            i = (mask & -mask).bit_length() - 1
            rest = mask ^ (1 << i)
            cross = 0.0
            j_mask = rest
            while j_mask:
                j = (j_mask & -j_mask).bit_length() - 1
                cross += koff[i, j]
                j_mask &= j_mask - 1
            self.A[mask] = self.A[rest] + 2.0 * cross
            self.L[mask] = self.L[rest] + self.c[i]
        self._by_count = {}
        for mask in range(size):
            self._by_count.setdefault(bin(mask).count("1"), []).append(mask)

    def masks(self, t):
        return self._by_count[t]

    def stat_values(self, t, fn):
        """fn(A, L) -> statistic; evaluated on every size-t subset."""
        masks = np.asarray(self.masks(t))
        return fn(self.A[masks], self.L[masks])

    def moments(self, t, fn):
        v = self.stat_values(t, fn)
        mu = v.mean()
        var = ((v - mu) ** 2).mean()
        mu3 = ((v - mu) ** 3).mean()
        return mu, var, mu3

    def nested_cov(self, s, t, fn_s, fn_t):
        """cov(X_s, Y_t) over nested uniform subsets G_s within G_t."""
        xs, yt = [], []
        for mask_t in self.masks(t):
            bits = [i for i in range(self.n) if mask_t >> i & 1]
            At, Lt = self.A[mask_t], self.L[mask_t]
            for sub in itertools.combinations(bits, s):
                m = 0
                for i in sub:
                    m |= 1 << i
                xs.append(fn_s(self.A[m], self.L[m]))
                yt.append(fn_t(At, Lt))
        xs, yt = np.asarray(xs), np.asarray(yt)
        return float(np.mean(xs * yt) - xs.mean() * yt.mean())


def d_of(oracle):
    R0 = oracle.R0
    return lambda A, L: 2.0 * L - R0


def w_of(oracle, t, r):
    """The r-weighted statistic as a function of (A, L) at group size t."""
    n = oracle.n
    R0 = oracle.R0
    x = r * (n - t - 1) / (n - 2)
    y = (t - 1) / (n - 2)
    return lambda A, L: (x + y) * A - 2.0 * y * L + y * R0


def alpha_of(t):
    return lambda A, L: A / (t * (t - 1))


def beta_of(oracle, t):
    n, R0 = oracle.n, oracle.R0
    m = n - t
    return lambda A, L: (R0 - 2.0 * L + A) / (m * (m - 1))
