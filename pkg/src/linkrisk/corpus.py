"""Comment ingestion and text normalization into per-profile token streams.

The normalization pipeline applies, in order: lowercasing, markdown
stripping, diacritic cleanup, URL-to-hostname replacement, punctuation
removal (smilies and hostnames survive), collapsing of long character runs,
whitespace tokenization, and stopword removal.

Markdown handling is a pragmatic subset (emphasis, links, headings, lists,
tables, blockquotes, inline and fenced code); layout markers are unwrapped
around their text, while embedded content such as code blocks and quoted
text is deleted outright.  Unrecognized syntax passes through as plain text.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

__all__ = [
    "RawComment",
    "NormalizationConfig",
    "TokenStream",
    "IngestResult",
    "ingest_jsonl",
    "normalize",
    "aggregate_profiles",
    "filter_interesting",
    "load_wordlist",
    "default_stopwords",
    "default_smilies",
    "wordlist_hash",
    "write_profiles",
    "load_profiles",
]

ProfileKey = Tuple[str, str]

_SENTINEL = "\x00"
_SMILEY_MARK = "\x02"
_WS_SPLIT = re.compile(r"(\s+)")

_MD_FENCE = re.compile(r"```.*?```", re.DOTALL)
_MD_INDENT_CODE = re.compile(r"^(?: {4}|\t).*$", re.MULTILINE)
_MD_INLINE_CODE = re.compile(r"`[^`\n]*`")
_MD_QUOTE = re.compile(r"^ {0,3}>.*$", re.MULTILINE)
_MD_LINK = re.compile(r"\[([^\]]*)\]\(\s*([^)\s]+)[^)]*\)")
_MD_TABLE_SEP = re.compile(r"^ {0,3}\|?[ :|-]+\|[ :|-]*$", re.MULTILINE)
_MD_HR = re.compile(r"^ {0,3}[-*_]{3,}[ \t]*$", re.MULTILINE)
_MD_LIST = re.compile(r"^ {0,3}(?:[-*+]|\d+\.)[ \t]+", re.MULTILINE)
_MD_HEADING = re.compile(r"^ {0,3}#{1,6}[ \t]+", re.MULTILINE)
_MD_EMPHASIS = re.compile(r"(\*{1,3}|_{1,3}|~~)(.+?)\1")

_URL = re.compile(r"(?:[a-z][a-z0-9+.\-]*://|(?<![\w.])www\.)\S+")
_HOST_JUNK = re.compile(r"[^\w.\-]")


@dataclass
class RawComment:
    """One comment as read from the input stream."""

    author_id: str
    community_id: str
    body: str
    created_at: Optional[int] = None

    def __post_init__(self):
        if not self.author_id:
            raise ValueError("author_id must be nonempty")
        if not self.community_id:
            raise ValueError("community_id must be nonempty")


@dataclass
class TokenStream:
    """Normalized tokens of all comments of one (author, community) profile."""

    profile_key: ProfileKey
    tokens: List[str] = field(default_factory=list)
    n_comments: int = 0


@dataclass
class IngestResult:
    comments: List[RawComment]
    errors: List[Tuple[int, str]]


@dataclass(frozen=True)
class NormalizationConfig:
    """Switches and word lists for the normalization pipeline.

    The six step flags follow pipeline order; tokenization and stopword
    filtering always run at the end (an empty stopword set disables the
    latter in effect).  Smiley literals are matched after lowercasing, so
    the configured set is lowercased on construction.
    """

    stopwords: frozenset = frozenset()
    smilies: frozenset = frozenset()
    max_char_repeat: int = 3
    lowercase: bool = True
    strip_markdown: bool = True
    strip_diacritics: bool = True
    replace_urls: bool = True
    strip_punctuation: bool = True
    collapse_repeats: bool = True

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))
        object.__setattr__(self, "smilies", frozenset(s.lower() for s in self.smilies))
        if self.max_char_repeat < 1:
            raise ValueError("max_char_repeat must be >= 1")
        if self.strip_punctuation and not self.smilies:
            raise ValueError("smilies must be nonempty when punctuation stripping is enabled")

    @classmethod
    def default(cls, **overrides) -> "NormalizationConfig":
        overrides.setdefault("stopwords", default_stopwords())
        overrides.setdefault("smilies", default_smilies())
        return cls(**overrides)


def load_wordlist(path) -> Set[str]:
    """Read a one-entry-per-line list; blank lines and # comments ignored."""
    entries = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            entry = line.strip()
            if entry and not entry.startswith("#"):
                entries.add(entry)
    return entries


def _packaged_list(name: str) -> Set[str]:
    text = resources.files("linkrisk").joinpath("data", name).read_text("utf-8")
    return {ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")}


def default_stopwords() -> Set[str]:
    return _packaged_list("stopwords.txt")


def default_smilies() -> Set[str]:
    return _packaged_list("smilies.txt")


def wordlist_hash(entries: Iterable[str]) -> str:
    """Order-independent sha256 of a word list, for output manifests."""
    canon = "\n".join(sorted(set(entries))).encode("utf-8")
    return hashlib.sha256(canon).hexdigest()


def ingest_jsonl(stream, lenient: bool = False) -> IngestResult:
    """Parse line-delimited JSON comments.

    `stream` may be a file-like object, an iterable of lines, or a str/bytes
    blob.  Each record needs `author`, `community`, and `body`; `created_at`
    is optional.  In strict mode the first bad line raises ValueError with
    its line number; in lenient mode bad lines are collected as
    (line_number, message) pairs and skipped.
    """
    if isinstance(stream, bytes):
        stream = stream.decode("utf-8").splitlines()
    elif isinstance(stream, str):
        stream = stream.splitlines()

    comments: List[RawComment] = []
    errors: List[Tuple[int, str]] = []
    for line_no, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8", errors="replace")
        line = raw.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ValueError("record is not a JSON object")
            missing = [k for k in ("author", "community", "body") if k not in rec]
            if missing:
                raise ValueError(f"missing required field(s): {', '.join(missing)}")
            created = rec.get("created_at")
            comment = RawComment(
                author_id=str(rec["author"]),
                community_id=str(rec["community"]),
                body=str(rec["body"]),
                created_at=int(created) if created is not None else None,
            )
        except (ValueError, TypeError) as exc:
            if not lenient:
                raise ValueError(f"line {line_no}: {exc}") from exc
            errors.append((line_no, str(exc)))
            continue
        comments.append(comment)
    return IngestResult(comments=comments, errors=errors)


def _strip_markdown(text: str, smilies=frozenset()) -> str:
    # smilies may contain markdown-active characters (:-|, *-*, o_o);
    # shield whole-chunk matches behind placeholders for the duration
    placeholders = {}
    if smilies:
        parts = _WS_SPLIT.split(text)
        for i, part in enumerate(parts):
            if part in smilies:
                key = f"{_SMILEY_MARK}{len(placeholders)}{_SMILEY_MARK}"
                placeholders[key] = part
                parts[i] = key
        text = "".join(parts)
    text = _MD_FENCE.sub(" ", text)
    text = _MD_INDENT_CODE.sub(" ", text)
    text = _MD_INLINE_CODE.sub(" ", text)
    text = _MD_QUOTE.sub(" ", text)
    text = _MD_LINK.sub(r"\1 \2", text)
    text = _MD_TABLE_SEP.sub(" ", text)
    text = _MD_HR.sub(" ", text)
    text = _MD_LIST.sub("", text)
    text = _MD_HEADING.sub("", text)
    text = _MD_EMPHASIS.sub(r"\2", text)
    text = text.replace("|", " ")
    for key, smiley in placeholders.items():
        text = text.replace(key, smiley)
    return text


def _strip_diacritics(text: str) -> str:
    # compose what can be composed, then drop leftover combining marks
    composed = unicodedata.normalize("NFC", text)
    return "".join(ch for ch in composed if not unicodedata.combining(ch))


def _hostname(url: str) -> str:
    rest = url.split("://", 1)[1] if "://" in url else url
    rest = re.split(r"[/?#]", rest, maxsplit=1)[0]
    rest = rest.rpartition("@")[2]
    rest = rest.split(":", 1)[0]
    return _HOST_JUNK.sub("", rest).strip("._-")


def _replace_urls(text: str) -> str:
    def repl(match: re.Match) -> str:
        host = _hostname(match.group(0))
        return f"{_SENTINEL}{host}{_SENTINEL}" if host else " "

    return _URL.sub(repl, text)


def _strip_punctuation(text: str, smilies) -> str:
    chunks = []
    for chunk in text.split():
        if chunk in smilies:
            chunks.append(chunk)
            continue
        kept = []
        protected = False
        for ch in chunk:
            if ch == _SENTINEL:
                protected = not protected
                continue
            if protected:
                kept.append(ch)
                continue
            if unicodedata.category(ch)[0] in ("P", "S"):
                continue
            kept.append(ch)
        if kept:
            chunks.append("".join(kept))
    return " ".join(chunks)


def _collapse_repeats(text: str, max_repeat: int) -> str:
    pattern = re.compile(r"(.)\1{%d,}" % max_repeat, re.DOTALL)
    return pattern.sub(lambda m: m.group(1) * max_repeat, text)


def normalize(body: str, cfg: NormalizationConfig) -> List[str]:
    """Run the full pipeline over one comment body.

    Total function: any input yields a (possibly empty) token list.
    """
    text = body.replace(_SENTINEL, " ").replace(_SMILEY_MARK, " ")
    if cfg.lowercase:
        text = text.lower()
    if cfg.strip_markdown:
        text = _strip_markdown(text, cfg.smilies)
    if cfg.strip_diacritics:
        text = _strip_diacritics(text)
    if cfg.replace_urls:
        text = _replace_urls(text)
    if cfg.strip_punctuation:
        text = _strip_punctuation(text, cfg.smilies)
    else:
        text = text.replace(_SENTINEL, "")
    if cfg.collapse_repeats:
        text = _collapse_repeats(text, cfg.max_char_repeat)
    return [tok for tok in text.split() if tok not in cfg.stopwords]


def aggregate_profiles(
    comments: Iterable[RawComment], cfg: NormalizationConfig
) -> Dict[ProfileKey, TokenStream]:
    """Normalize comments and group the tokens per (author, community).

    Per-comment normalization is pure; the reduction appends tokens in
    comment order and returns profiles sorted by key, so the outcome is
    the same however the comments were partitioned for processing.
    """
    profiles: Dict[ProfileKey, TokenStream] = {}
    for comment in comments:
        key = (comment.author_id, comment.community_id)
        stream = profiles.get(key)
        if stream is None:
            stream = profiles[key] = TokenStream(profile_key=key)
        stream.tokens.extend(normalize(comment.body, cfg))
        stream.n_comments += 1
    return {key: profiles[key] for key in sorted(profiles)}


def write_profiles(profiles: Mapping[ProfileKey, TokenStream], path) -> None:
    """Persist token streams, one JSON record per profile, sorted by key."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(profiles):
            stream = profiles[key]
            rec = {
                "author": key[0],
                "community": key[1],
                "n_comments": stream.n_comments,
                "tokens": stream.tokens,
            }
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


def load_profiles(path) -> Dict[ProfileKey, TokenStream]:
    """Read back a profile store written by `write_profiles`."""
    profiles: Dict[ProfileKey, TokenStream] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            key = (rec["author"], rec["community"])
            profiles[key] = TokenStream(
                profile_key=key,
                tokens=list(rec["tokens"]),
                n_comments=int(rec.get("n_comments", 0)),
            )
    return profiles


def filter_interesting(
    profiles: Mapping[ProfileKey, TokenStream],
    min_comments: int,
    min_profiles: int,
    exclude_communities: Sequence[str] = (),
) -> Dict[ProfileKey, TokenStream]:
    """Keep profiles with enough comments in communities with enough such profiles.

    Single pass: first qualify profiles by comment count, then drop
    communities whose qualifying-profile count falls short.  The two
    conditions are not iterated to a fixpoint.  Both thresholds are
    inclusive.  `exclude_communities` removes whole communities first.
    """
    excluded = set(exclude_communities)
    qualified = {
        key: stream
        for key, stream in profiles.items()
        if key[1] not in excluded and stream.n_comments >= min_comments
    }
    per_community: Dict[str, int] = {}
    for key in qualified:
        per_community[key[1]] = per_community.get(key[1], 0) + 1
    return {
        key: stream
        for key, stream in qualified.items()
        if per_community[key[1]] >= min_profiles
    }
