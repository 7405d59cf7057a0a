import json

import numpy as np
import pytest

from linkrisk import corpus


@pytest.fixture(scope="module")
def cfg():
    return corpus.NormalizationConfig.default()


# --- golden normalization behavior ---------------------------------------


def test_repeated_characters_collapse(cfg):
    assert corpus.normalize("cooooooool", cfg) == ["coool"]


def test_emphasis_unwrapped(cfg):
    assert corpus.normalize("*text*", cfg) == ["text"]


def test_url_replaced_by_hostname(cfg):
    assert "see" in cfg.stopwords
    assert corpus.normalize("see https://www.mypage.com/a?q=1", cfg) == ["www.mypage.com"]


def test_inline_code_removed_completely(cfg):
    assert corpus.normalize("`rm -rf`", cfg) == []


def test_smiley_survives_punctuation(cfg):
    assert corpus.normalize("nice :) day", cfg) == ["nice", ":)", "day"]
    # uppercase smiley forms are matched after lowercasing
    assert ":d" in cfg.smilies
    assert corpus.normalize("great :D", cfg) == ["great", ":d"]


def test_lowercasing(cfg):
    assert corpus.normalize("MiXeD CaSe WoRdS", cfg) == ["mixed", "case", "words"]


def test_fenced_code_and_quotes_removed(cfg):
    body = "keep1\n```\nsecret code\n```\n> quoted reply\nkeep2"
    tokens = corpus.normalize(body, cfg)
    assert "secret" not in tokens and "code" not in tokens
    assert "quoted" not in tokens and "reply" not in tokens
    assert "keep1" in tokens and "keep2" in tokens


def test_indented_code_removed(cfg):
    tokens = corpus.normalize("normal line\n    indented = code()\nending", cfg)
    assert "indented" not in tokens
    assert "normal" in tokens and "ending" in tokens


def test_markdown_link_keeps_text_and_hostname(cfg):
    tokens = corpus.normalize("[my page](http://www.mypage.com/sub)", cfg)
    assert tokens == ["page", "www.mypage.com"]  # "my" is a stopword


def test_heading_list_table_markers_stripped(cfg):
    body = "# title\n- item1\n2. item2\n|cell1|cell2|\n|---|---|\n"
    tokens = corpus.normalize(body, cfg)
    assert tokens == ["title", "item1", "item2", "cell1", "cell2"]


def test_diacritics_composed_letters_survive(cfg):
    # e + combining acute composes; the stray second accent is dropped
    tokens = corpus.normalize("café́", cfg)
    assert tokens == ["café"]


def test_stacked_diacritics_removed(cfg):
    zalgo = "z̶̡e̴̢b̴͈r̶͉a̵̯"
    assert corpus.normalize(zalgo, cfg) == ["zebra"]


def test_url_variants(cfg):
    assert corpus.normalize("ftp://files.example.org/pub", cfg) == ["files.example.org"]
    assert corpus.normalize("http://user:pw@host.net:8080/x", cfg) == ["host.net"]
    assert corpus.normalize("www.example.com", cfg) == ["www.example.com"]
    assert corpus.normalize("(www.example.com)", cfg) == ["www.example.com"]


def test_numerals_kept(cfg):
    assert corpus.normalize("42 things", cfg) == ["42", "things"]


def test_empty_and_pathological_inputs(cfg):
    assert corpus.normalize("", cfg) == []
    assert corpus.normalize("   \n\t  ", cfg) == []
    assert corpus.normalize("!!! ... ???", cfg) == []


def test_token_order_follows_text_order(cfg):
    assert corpus.normalize("zebra apple mango", cfg) == ["zebra", "apple", "mango"]


# --- pipeline invariants on fuzzed input ----------------------------------

FULL_POOL = list("abcdefgh .,!?*_`[]()>#|/:~é😀") + ["́", "w", "o"]
IDEMPOTENT_POOL = list("abcdefgh .,!?é:;") + ["́", "w", "o", "."]


def _random_text(rng, pool, max_len=60):
    n = int(rng.integers(0, max_len))
    return "".join(pool[i] for i in rng.integers(0, len(pool), size=n))


def test_fuzz_no_stopwords_and_no_long_runs(cfg):
    rng = np.random.default_rng(21)
    for _ in range(300):
        tokens = corpus.normalize(_random_text(rng, FULL_POOL), cfg)
        for tok in tokens:
            assert tok not in cfg.stopwords
            assert tok != ""
            run, last = 1, ""
            for ch in tok:
                run = run + 1 if ch == last else 1
                last = ch
                assert run <= cfg.max_char_repeat


def test_fuzz_idempotence_without_markdown(cfg):
    rng = np.random.default_rng(22)
    for _ in range(300):
        text = _random_text(rng, IDEMPOTENT_POOL)
        once = corpus.normalize(text, cfg)
        twice = corpus.normalize(" ".join(once), cfg)
        assert set(twice) == set(once)


def test_configured_smilies_survive_verbatim(cfg):
    rng = np.random.default_rng(23)
    smilies = sorted(cfg.smilies)
    for smiley in rng.choice(smilies, size=30, replace=False):
        tokens = corpus.normalize(f"pad {smiley} pad", cfg)
        assert smiley in tokens


# --- config validation -----------------------------------------------------


def test_config_rejects_bad_repeat():
    with pytest.raises(ValueError):
        corpus.NormalizationConfig(stopwords=frozenset(), smilies=frozenset({":)"}), max_char_repeat=0)


def test_config_requires_smilies_with_punctuation():
    with pytest.raises(ValueError, match="smilies"):
        corpus.NormalizationConfig(stopwords=frozenset(), smilies=frozenset())
    # fine when punctuation stripping is off
    corpus.NormalizationConfig(stopwords=frozenset(), smilies=frozenset(), strip_punctuation=False)


def test_steps_can_be_disabled():
    cfg = corpus.NormalizationConfig(
        stopwords=frozenset(),
        smilies=frozenset({":)"}),
        lowercase=False,
        strip_markdown=False,
        strip_diacritics=False,
        replace_urls=False,
        strip_punctuation=False,
        collapse_repeats=False,
    )
    assert corpus.normalize("Keep *ALL* of thiiiiis", cfg) == ["Keep", "*ALL*", "of", "thiiiiis"]


# --- ingestion --------------------------------------------------------------


def test_ingest_basic_mapping():
    result = corpus.ingest_jsonl('{"author":"u1","community":"lost","body":"hi"}')
    assert len(result.comments) == 1
    c = result.comments[0]
    assert (c.author_id, c.community_id, c.body) == ("u1", "lost", "hi")
    assert c.created_at is None


def test_ingest_empty_stream():
    result = corpus.ingest_jsonl("")
    assert result.comments == [] and result.errors == []


def test_ingest_lenient_counts_errors():
    result = corpus.ingest_jsonl('not json\n{"author":"a","community":"c","body":""}', lenient=True)
    assert len(result.errors) == 1
    assert result.errors[0][0] == 1
    assert len(result.comments) == 1


def test_ingest_strict_raises_with_line_number():
    with pytest.raises(ValueError, match="line 2"):
        corpus.ingest_jsonl('{"author":"a","community":"c","body":"x"}\nbroken', lenient=False)


def test_ingest_missing_field():
    result = corpus.ingest_jsonl('{"author":"a","body":"x"}', lenient=True)
    assert result.comments == []
    assert "community" in result.errors[0][1]


def test_ingest_created_at_and_bytes():
    blob = b'{"author":"a","community":"c","body":"x","created_at":123}'
    result = corpus.ingest_jsonl(blob)
    assert result.comments[0].created_at == 123


def test_raw_comment_validates_keys():
    with pytest.raises(ValueError):
        corpus.RawComment(author_id="", community_id="c", body="")
    with pytest.raises(ValueError):
        corpus.RawComment(author_id="a", community_id="", body="")


# --- aggregation and filtering ----------------------------------------------


def _stream(n_comments):
    return corpus.TokenStream(profile_key=("u", "c"), tokens=["t"], n_comments=n_comments)


def test_aggregate_profiles_orders_and_counts(cfg):
    comments = [
        corpus.RawComment("bob", "lost", "first words"),
        corpus.RawComment("alice", "lost", "apple"),
        corpus.RawComment("bob", "lost", "more words"),
    ]
    profiles = corpus.aggregate_profiles(comments, cfg)
    assert list(profiles) == [("alice", "lost"), ("bob", "lost")]
    assert profiles[("bob", "lost")].n_comments == 2
    # "first" and "more" are stopwords in the default list
    assert profiles[("bob", "lost")].tokens == ["words", "words"]


def test_filter_drops_profile_below_min_comments():
    profiles = {
        ("a", "c"): corpus.TokenStream(("a", "c"), ["t"], n_comments=99),
        ("b", "c"): corpus.TokenStream(("b", "c"), ["t"], n_comments=100),
    }
    kept = corpus.filter_interesting(profiles, min_comments=100, min_profiles=1)
    assert set(kept) == {("b", "c")}


def test_filter_zero_thresholds_identity():
    profiles = {("a", "c"): corpus.TokenStream(("a", "c"), [], n_comments=0)}
    assert corpus.filter_interesting(profiles, 0, 0) == profiles


def test_filter_community_threshold_inclusive():
    profiles = {
        (f"u{i}", "c"): corpus.TokenStream((f"u{i}", "c"), ["t"], n_comments=100)
        for i in range(100)
    }
    kept = corpus.filter_interesting(profiles, min_comments=100, min_profiles=100)
    assert len(kept) == 100
    kept = corpus.filter_interesting(profiles, min_comments=100, min_profiles=101)
    assert kept == {}


def test_filter_community_dropped_after_profile_qualification():
    profiles = {
        ("a", "c"): corpus.TokenStream(("a", "c"), ["t"], n_comments=100),
        ("b", "c"): corpus.TokenStream(("b", "c"), ["t"], n_comments=5),
    }
    kept = corpus.filter_interesting(profiles, min_comments=100, min_profiles=2)
    assert kept == {}


def test_filter_exclude_communities():
    profiles = {
        ("a", "big"): corpus.TokenStream(("a", "big"), ["t"], n_comments=10),
        ("a", "ok"): corpus.TokenStream(("a", "ok"), ["t"], n_comments=10),
    }
    kept = corpus.filter_interesting(profiles, 1, 1, exclude_communities=["big"])
    assert set(kept) == {("a", "ok")}


# --- persistence and hashing -------------------------------------------------


def test_profiles_roundtrip(tmp_path):
    profiles = {
        ("a", "c"): corpus.TokenStream(("a", "c"), ["x", "y"], n_comments=2),
        ("b", "d"): corpus.TokenStream(("b", "d"), [], n_comments=1),
    }
    path = tmp_path / "profiles.jsonl"
    corpus.write_profiles(profiles, path)
    loaded = corpus.load_profiles(path)
    assert loaded == profiles


def test_wordlist_hash_is_order_independent(tmp_path):
    assert corpus.wordlist_hash(["b", "a"]) == corpus.wordlist_hash(["a", "b", "a"])
    assert corpus.wordlist_hash(["a"]) != corpus.wordlist_hash(["b"])


def test_load_wordlist_skips_comments(tmp_path):
    path = tmp_path / "list.txt"
    path.write_text("# heading\nalpha\n\nbeta\n", encoding="utf-8")
    assert corpus.load_wordlist(path) == {"alpha", "beta"}
