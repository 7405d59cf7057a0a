"""Convergence radii, anonymity subsets, matching, and adversary choice bounds.

Everything here operates on a symmetric matrix of sqrt-JS distances.  A
profile is anonymous to the extent that many peers sit within a small
radius of it; the matching bound turns that neighborhood size and radius
into an upper limit on a distance-based adversary's linking likelihood.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from . import lm, metric

__all__ = [
    "DistanceMatrix",
    "AnonymityResult",
    "MatchingBound",
    "convergent_subset",
    "is_kd_anonymous",
    "c_matches",
    "lemma_bound_check",
    "choice_likelihood",
    "matching_bound",
    "unlinkability_sigma",
]


@dataclass
class DistanceMatrix:
    """Pairwise distances over an ordered profile list.

    `values[i, j]` is the distance between `keys[i]` and `keys[j]`;
    the matrix is symmetric with a zero diagonal and entries in [0, 1].
    """

    keys: List[str]
    values: np.ndarray

    def __post_init__(self):
        self._index = {k: i for i, k in enumerate(self.keys)}

    @classmethod
    def build(cls, models: Mapping[str, object], workers: int | None = None) -> "DistanceMatrix":
        """Compute the matrix for a key->model mapping (models or distributions)."""
        keys = sorted(models)
        dists = [_as_distribution(models[k]) for k in keys]
        return cls(keys=keys, values=metric.pairwise_distances(dists, workers=workers))

    def index_of(self, key: str) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise ValueError(f"unknown profile {key!r}") from None

    def distance(self, a: str, b: str) -> float:
        return float(self.values[self.index_of(a), self.index_of(b)])

    def save(self, path) -> None:
        """Write a JSON header line plus the little-endian float32 upper triangle."""
        n = len(self.keys)
        iu = np.triu_indices(n, k=1)
        payload = self.values[iu].astype("<f4").tobytes()
        header = {
            "format": "linkrisk-dmat",
            "version": 1,
            "n": n,
            "keys": self.keys,
            "ordering": "row-major-upper",
            "dtype": "<f4",
            "checksum": "sha256:" + hashlib.sha256(payload).hexdigest(),
        }
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
            fh.write(b"\n")
            fh.write(payload)

    @classmethod
    def load(cls, path) -> "DistanceMatrix":
        with open(path, "rb") as fh:
            header = json.loads(fh.readline().decode("utf-8"))
            payload = fh.read()
        if header.get("format") != "linkrisk-dmat":
            raise ValueError(f"{path}: not a linkrisk distance matrix")
        digest = "sha256:" + hashlib.sha256(payload).hexdigest()
        if digest != header["checksum"]:
            raise ValueError(f"{path}: checksum mismatch")
        n = header["n"]
        tri = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        values = np.zeros((n, n), dtype=np.float64)
        iu = np.triu_indices(n, k=1)
        values[iu] = tri
        values[(iu[1], iu[0])] = tri
        return cls(keys=list(header["keys"]), values=values)


def _as_distribution(model):
    if isinstance(model, lm.UnigramModel):
        return lm.to_distribution(model)
    return model


@dataclass
class AnonymityResult:
    """The maximal set of profiles within radius `d` of `subject`."""

    subject: str
    d: float
    members: Tuple[str, ...]
    k: int


@dataclass
class MatchingBound:
    """Upper bound t on the linking likelihood of a distance-only adversary.

    For a true match at distance c hiding in a size-k neighborhood of
    radius d, t = 1 - c / (c + (k-1)(c+d)).
    """

    c: float
    d: float
    k: int
    t: float


def convergent_subset(m: DistanceMatrix, subject: str, d: float) -> AnonymityResult:
    """All profiles within distance d of the subject (subject included)."""
    if not 0.0 <= d <= 1.0:
        raise ValueError("d must be in [0, 1]")
    i = m.index_of(subject)
    row = m.values[i]
    members = tuple(m.keys[j] for j in np.flatnonzero(row <= d))
    return AnonymityResult(subject=subject, d=d, members=members, k=len(members))


def is_kd_anonymous(m: DistanceMatrix, subject: str, k: int, d: float) -> bool:
    """Whether at least k profiles (subject included) lie within radius d."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return convergent_subset(m, subject, d).k >= k


def c_matches(dist_value: float, c: float) -> bool:
    """Whether a distance qualifies as a match at threshold c (inclusive)."""
    if not 0.0 <= dist_value <= 1.0 or not 0.0 <= c <= 1.0:
        raise ValueError("distance and c must be in [0, 1]")
    return dist_value <= c


def lemma_bound_check(
    m: DistanceMatrix, subject_set: Sequence[str], target: str, c: float, d: float
) -> bool:
    """Verify that a convergent set around a matching profile matches at c+d.

    Preconditions: some member of `subject_set` has all other members within
    d and itself lies within c of `target`.  Raises ValueError when no such
    member exists.  With a true metric the triangle inequality then forces
    every member within c+d of the target, so the check always returns True
    on consistent inputs; it exists to exercise exactly that claim.
    """
    members = list(subject_set)
    ti = m.index_of(target)
    anchor = None
    for cand in members:
        ci = m.index_of(cand)
        if m.values[ci, ti] <= c and all(m.values[ci, m.index_of(o)] <= d for o in members):
            anchor = cand
            break
    if anchor is None:
        raise ValueError("precondition violated: no member both c-matches the target and d-covers the set")
    return all(m.values[m.index_of(member), ti] <= c + d for member in members)


def choice_likelihood(
    m: DistanceMatrix,
    candidates: Sequence[str],
    target: str,
    chosen: str,
    normalized: bool = False,
) -> float:
    """Likelihood that a distance-only adversary picks `chosen` for `target`.

    Raw score: 1 - dist(chosen, target) / sum of all candidate distances.
    The raw scores over n candidates sum to n-1, so they form a proper
    distribution only for n = 2; `normalized=True` divides by n-1, which
    is the form to use when actually sampling an adversary's choice.
    """
    cands = list(candidates)
    if len(cands) < 2:
        raise ValueError("need at least 2 candidates")
    if chosen not in cands:
        raise ValueError(f"chosen profile {chosen!r} not among candidates")
    ti = m.index_of(target)
    total = sum(float(m.values[m.index_of(c), ti]) for c in cands)
    if total <= 0.0:
        raise ValueError("degenerate: all candidates identical to target")
    score = 1.0 - float(m.values[m.index_of(chosen), ti]) / total
    return score / (len(cands) - 1) if normalized else score


def matching_bound(c: float, d: float, k: int) -> MatchingBound:
    """Bound on the adversary's likelihood of linking a (k,d)-anonymous match.

    `c` is the matching distance between the true pair, `d` the convergence
    radius of the anonymous neighborhood, `k` its size.  Undefined at c = 0.
    """
    if c <= 0.0:
        raise ValueError("bound undefined at zero matching distance")
    if d < 0.0:
        raise ValueError("d must be >= 0")
    if k < 1:
        raise ValueError("k must be >= 1")
    t = 1.0 - c / (c + (k - 1) * (c + d))
    return MatchingBound(c=c, d=d, k=k, t=t)


def unlinkability_sigma(c: float, d: float, k: int) -> float:
    """The sigma for which the linked pair stays sigma-unlinkable; equals the matching bound."""
    return matching_bound(c, d, k).t
