"""Recursive multiple change-point detection by binary segmentation.

Each segment is tested on its own; if the p-value clears the threshold the
segment splits at the estimated change and both sides recurse. By default
every segment gets its own median-heuristic bandwidth; global mode reuses the
kernel built once on the full sequence (submatrices of it).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fast_tests, permutation, scan
from .errors import ConfigError
from .gram import GramSummary, Sequence, as_sequence, build_gram, gram_from_kernel

METHODS = ("fgkcp1", "fgkcp2", "fgkcp1-simes", "fgkcp2-simes", "gkcp")


@dataclass
class ChangeNode:
    """One tested segment: 1-based inclusive [start, end]."""

    start: int
    end: int
    method: str
    p_value: float | None = None
    split: int | None = None          # global index of the last pre-change point
    reason: str = ""                  # "split" | "not-significant" | "too-short"
    children: list = field(default_factory=list)

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass
class ChangeTree:
    root: ChangeNode
    change_points: list
    method: str
    threshold: float
    min_len: int

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)


def _segment_test(g: GramSummary, method: str, n_perm: int, seed,
                  min_len: int):
    # splits stay at least min_len/2 from segment ends, which keeps detected
    # change points at least min_len/2 apart and children recursable
    n0, n1 = scan.default_bounds(g.n)
    n0 = max(n0, min_len // 2)
    n1 = min(n1, g.n - n0)
    if method == "gkcp":
        res = permutation.perm_pvalue(
            g, permutation.PermConfig(n_perm=n_perm, seed=seed, statistic="gkcp"),
            n0, n1)
        prof = scan.scan_single(g, n0, n1, r_list=(1.0,))
        return res.p, prof.argmax_t
    variant = fast_tests.fgkcp1 if method.startswith("fgkcp1") else fast_tests.fgkcp2
    combine = fast_tests.SIMES if method.endswith("simes") else fast_tests.BONFERRONI
    rep = variant(g, n0, n1, combine=combine)
    return rep.combined_p, rep.argmax_t


def binary_segment(seq, method: str = "fgkcp1", threshold: float = 0.001,
                   min_len: int | None = None, n_perm: int = 1000,
                   seed: int = 0, global_bandwidth: bool = False) -> ChangeTree:
    """Recursive segmentation; recursion stops when a segment fails to reject
    at ``threshold`` or is shorter than ``min_len``.

    Detected change points are returned sorted; each is the last index of its
    left segment (1-based).
    """
    seq = as_sequence(seq)
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    if not 0 <= threshold < 1:
        raise ConfigError("threshold must be in [0, 1)")
    if min_len is None:
        min_len = max(8, 2 * scan.default_bounds(seq.n)[0])
    if min_len < 8:
        raise ConfigError("min_len must be at least 8 (4 observations per side)")

    full_gram = build_gram(seq) if global_bandwidth else None

    def gram_for(lo: int, hi: int) -> GramSummary:
        if full_gram is not None:
            idx = np.arange(lo - 1, hi)
            return gram_from_kernel(full_gram.k[np.ix_(idx, idx)],
                                    bandwidth=full_gram.bandwidth)
        return build_gram(Sequence(seq.values[lo - 1:hi]))

    changes: list[int] = []

    def recurse(lo: int, hi: int, depth: int) -> ChangeNode:
        node = ChangeNode(start=lo, end=hi, method=method)
        if hi - lo + 1 < min_len:
            node.reason = "too-short"
            return node
        g = gram_for(lo, hi)
        # per-node permutation stream, a pure function of (seed, segment)
        node_seed = int(np.random.SeedSequence((seed, depth, lo, hi)).generate_state(1)[0])
        p, local_t = _segment_test(g, method, n_perm, node_seed, min_len)
        node.p_value = p
        if threshold <= 0 or p >= threshold:
            node.reason = "not-significant"
            return node
        split = lo - 1 + local_t
        node.split = split
        node.reason = "split"
        changes.append(split)
        node.children = [recurse(lo, split, depth + 1),
                         recurse(split + 1, hi, depth + 1)]
        return node

    root = recurse(1, seq.n, 0)
    return ChangeTree(root=root, change_points=sorted(changes), method=method,
                      threshold=threshold, min_len=min_len)
