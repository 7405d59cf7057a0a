"""Unigram language models for profiles, communities, and the whole corpus.

A model is a sparse token->count table; normalizing the counts by their sum
yields the token distribution that the distance metric consumes.  Community
models are the count-wise sum of their member profiles, and the global model
is the sum of all communities.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Tuple

__all__ = [
    "UnigramModel",
    "Distribution",
    "build_models",
    "to_distribution",
    "top_k",
    "merge",
    "save_models",
    "load_models",
]

ProfileKey = Tuple[str, str]  # (author_id, community_id)


@dataclass
class Distribution:
    """Sparse token->probability map; entries are positive and sum to one."""

    probs: Dict[str, float]

    def validate(self, tol: float = 1e-12) -> None:
        total = 0.0
        for token, p in sorted(self.probs.items()):
            if not 0.0 < p <= 1.0:
                raise ValueError(f"probability out of (0,1] for {token!r}: {p}")
            total += p
        if abs(total - 1.0) > tol:
            raise ValueError(f"probabilities sum to {total}, not 1")


@dataclass
class UnigramModel:
    """Token counts plus their running total for one profile or community."""

    counts: Dict[str, int] = field(default_factory=dict)
    total: int = 0

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "UnigramModel":
        model = cls()
        model.add(tokens)
        return model

    def add(self, tokens: Iterable[str]) -> None:
        counts = self.counts
        n = 0
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
            n += 1
        self.total += n

    def merge_in(self, other: "UnigramModel") -> None:
        counts = self.counts
        for tok, c in other.counts.items():
            counts[tok] = counts.get(tok, 0) + c
        self.total += other.total


def merge(models: Iterable[UnigramModel]) -> UnigramModel:
    """Count-wise sum of several models."""
    out = UnigramModel()
    for m in models:
        out.merge_in(m)
    return out


def to_distribution(model: UnigramModel) -> Distribution:
    """Normalize counts into frequencies.  Raises on an empty model."""
    if model.total <= 0:
        raise ValueError("empty model: cannot normalize zero total count")
    total = float(model.total)
    return Distribution({tok: c / total for tok, c in model.counts.items() if c > 0})


def top_k(model: UnigramModel, k: int) -> List[Tuple[str, int]]:
    """The k most frequent tokens, ties broken by token ascending."""
    if k < 0:
        raise ValueError("k must be >= 0")
    ranked = sorted(model.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def build_models(
    token_streams: Mapping[ProfileKey, Iterable[str]],
) -> Tuple[Dict[ProfileKey, UnigramModel], Dict[str, UnigramModel], UnigramModel]:
    """Aggregate token streams into per-profile, per-community, and global models.

    `token_streams` maps (author, community) to an iterable of normalized
    tokens (a TokenStream works too).  Aggregation follows sorted profile
    keys so the result is identical no matter how the streams were produced.
    """
    profiles: Dict[ProfileKey, UnigramModel] = {}
    communities: Dict[str, UnigramModel] = {}
    global_model = UnigramModel()
    for key in sorted(token_streams):
        stream = token_streams[key]
        tokens = stream.tokens if hasattr(stream, "tokens") else stream
        model = UnigramModel.from_tokens(tokens)
        profiles[key] = model
        community = key[1]
        if community not in communities:
            communities[community] = UnigramModel()
        communities[community].merge_in(model)
    for name in sorted(communities):
        global_model.merge_in(communities[name])
    return profiles, communities, global_model


def save_models(
    path,
    profiles: Mapping[ProfileKey, UnigramModel],
    communities: Mapping[str, UnigramModel],
    global_model: UnigramModel,
) -> None:
    """Persist a model store as one JSON record per model."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(profiles):
            rec = {"kind": "profile", "key": list(key), "counts": profiles[key].counts}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
        for name in sorted(communities):
            rec = {"kind": "community", "key": name, "counts": communities[name].counts}
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
        rec = {"kind": "global", "key": None, "counts": global_model.counts}
        fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def load_models(path):
    """Read back a model store written by `save_models`."""
    profiles: Dict[ProfileKey, UnigramModel] = {}
    communities: Dict[str, UnigramModel] = {}
    global_model = UnigramModel()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            counts = {str(t): int(c) for t, c in rec["counts"].items()}
            model = UnigramModel(counts=counts, total=sum(counts.values()))
            kind = rec.get("kind")
            if kind == "profile":
                profiles[tuple(rec["key"])] = model
            elif kind == "community":
                communities[rec["key"]] = model
            elif kind == "global":
                global_model = model
            else:
                raise ValueError(f"line {line_no}: unknown model kind {kind!r}")
    return profiles, communities, global_model
