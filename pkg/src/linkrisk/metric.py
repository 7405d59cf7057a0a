"""Divergences and the square-root Jensen-Shannon distance on sparse distributions.

All logarithms are base 2, so the Jensen-Shannon divergence of two
distributions lies in [0, 1] and its square root is a metric on the same
range (1 is reached exactly when the supports are disjoint).

Two computation paths are provided: scalar functions over token->probability
mappings (`kl`, `js`, `distance`), and an array path used for pairwise
matrices (`SparseDistribution`, `pairwise_distances`, `cross_distances`).
Both iterate supports in sorted token order so results are bit-stable across
runs, thread counts, and argument order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "kl",
    "js",
    "distance",
    "SparseDistribution",
    "pairwise_distances",
    "cross_distances",
]


def _probs(dist) -> Mapping[str, float]:
    # accept either a raw mapping or an object exposing .probs
    return dist.probs if hasattr(dist, "probs") else dist


def kl(p, q) -> float:
    """Kullback-Leibler divergence KL(P || Q) in bits.

    Requires support(P) to be contained in support(Q); raises ValueError
    otherwise.  Terms absent from P contribute zero.
    """
    pp, qp = _probs(p), _probs(q)
    total = 0.0
    for token in sorted(pp):
        pv = pp[token]
        if pv <= 0.0:
            continue
        qv = qp.get(token, 0.0)
        if qv <= 0.0:
            raise ValueError(f"KL undefined: token {token!r} in P but not in Q")
        total += pv * math.log2(pv / qv)
    return total


def js(p, q) -> float:
    """Jensen-Shannon divergence in bits, in [0, 1].

    JS(P, Q) = KL(P||M)/2 + KL(Q||M)/2 with M = (P+Q)/2.  Tokens missing
    from both sides are skipped; a token present on exactly one side
    contributes p*log2(2) to that side's KL term since M(token) = p/2.
    The result is clamped into [0, 1] to absorb last-ulp rounding.
    """
    pp, qp = _probs(p), _probs(q)
    total = 0.0
    for token in sorted(pp.keys() | qp.keys()):
        pv = pp.get(token, 0.0)
        qv = qp.get(token, 0.0)
        m = 0.5 * (pv + qv)
        if m <= 0.0:
            continue
        term = 0.0
        if pv > 0.0:
            term += pv * math.log2(pv / m)
        if qv > 0.0:
            term += qv * math.log2(qv / m)
        total += 0.5 * term
    return min(1.0, max(0.0, total))


def distance(p, q) -> float:
    """Square-root Jensen-Shannon distance, a metric in [0, 1]."""
    return math.sqrt(js(p, q))


class SparseDistribution:
    """A distribution projected onto integer token ids, sorted by id.

    Used by the matrix builders: merging two sorted id arrays is much
    cheaper than repeated dict lookups when computing n^2/2 pairs.
    """

    __slots__ = ("ids", "probs")

    def __init__(self, ids: np.ndarray, probs: np.ndarray):
        self.ids = ids
        self.probs = probs

    @classmethod
    def from_mapping(cls, dist, vocab_index: Mapping[str, int]) -> "SparseDistribution":
        pp = _probs(dist)
        pairs = sorted((vocab_index[t], v) for t, v in pp.items() if v > 0.0)
        ids = np.fromiter((i for i, _ in pairs), dtype=np.int64, count=len(pairs))
        probs = np.fromiter((v for _, v in pairs), dtype=np.float64, count=len(pairs))
        return cls(ids, probs)


def build_vocab_index(dists: Iterable) -> Dict[str, int]:
    """Map every token appearing in `dists` to a stable id (sorted order)."""
    vocab = set()
    for d in dists:
        vocab.update(_probs(d).keys())
    return {tok: i for i, tok in enumerate(sorted(vocab))}


def sparse_js(a: SparseDistribution, b: SparseDistribution) -> float:
    """Jensen-Shannon divergence on the array representation.

    Identical in value (to the last bit, up to the final clamp) with `js`;
    decomposes the sum into the shared support plus the one-sided mass,
    where each one-sided token contributes half its probability.
    """
    ids_a, pa = a.ids, a.probs
    ids_b, pb = b.ids, b.probs
    if len(ids_a) == 0 or len(ids_b) == 0:
        total = 0.5 * (float(pa.sum()) + float(pb.sum()))
        return min(1.0, max(0.0, total))
    pos = np.searchsorted(ids_b, ids_a)
    hit = pos < len(ids_b)
    hit[hit] = ids_b[pos[hit]] == ids_a[hit]
    p = pa[hit]
    q = pb[pos[hit]]
    only_a = float(pa.sum()) - float(p.sum())
    only_b = float(pb.sum()) - float(q.sum())
    if len(p):
        m2 = p + q
        shared = float(np.sum(p * np.log2(2.0 * p / m2) + q * np.log2(2.0 * q / m2)))
    else:
        shared = 0.0
    total = 0.5 * (only_a + only_b + shared)
    return min(1.0, max(0.0, total))


def sparse_distance(a: SparseDistribution, b: SparseDistribution) -> float:
    return math.sqrt(sparse_js(a, b))


def _resolve_workers(workers) -> int:
    if workers is None:
        return 1
    return max(1, int(workers))


def pairwise_distances(dists: Sequence, workers: int | None = None) -> np.ndarray:
    """Symmetric matrix of sqrt-JS distances over a list of distributions.

    Rows are computed independently (optionally across `workers` threads)
    and written by index, so the result does not depend on scheduling.
    """
    index = build_vocab_index(dists)
    sparse = [SparseDistribution.from_mapping(d, index) for d in dists]
    n = len(sparse)
    out = np.zeros((n, n), dtype=np.float64)

    def fill_row(i: int) -> None:
        si = sparse[i]
        for j in range(i + 1, n):
            out[i, j] = sparse_distance(si, sparse[j])

    nworkers = _resolve_workers(workers)
    if nworkers == 1 or n < 4:
        for i in range(n):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            list(pool.map(fill_row, range(n)))
    upper = np.triu_indices(n, k=1)
    out[(upper[1], upper[0])] = out[upper]
    return out


def cross_distances(dists_a: Sequence, dists_b: Sequence, workers: int | None = None) -> np.ndarray:
    """len(a) x len(b) matrix of sqrt-JS distances between two collections."""
    index = build_vocab_index(list(dists_a) + list(dists_b))
    sa = [SparseDistribution.from_mapping(d, index) for d in dists_a]
    sb = [SparseDistribution.from_mapping(d, index) for d in dists_b]
    out = np.zeros((len(sa), len(sb)), dtype=np.float64)

    def fill_row(i: int) -> None:
        si = sa[i]
        for j in range(len(sb)):
            out[i, j] = sparse_distance(si, sb[j])

    nworkers = _resolve_workers(workers)
    if nworkers == 1 or len(sa) < 4:
        for i in range(len(sa)):
            fill_row(i)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            list(pool.map(fill_row, range(len(sa))))
    return out
