import numpy as np
import pytest

from linkrisk import corpus, evaluation, lm, metric
from linkrisk.evaluation import GroundTruthLink
from conftest import random_distribution


def dist(probs):
    return lm.Distribution(dict(probs))


# --- distance statistics ------------------------------------------------------


def test_stats_identical_profiles():
    models = {"a": dist({"x": 1.0}), "b": dist({"x": 1.0})}
    stats = evaluation.cross_distance_stats(models)
    assert stats == {"min": 0.0, "max": 0.0, "mean": 0.0}


def test_stats_disjoint_profiles():
    models = {"a": dist({"x": 1.0}), "b": dist({"y": 1.0})}
    stats = evaluation.cross_distance_stats(models)
    assert stats["min"] == pytest.approx(1.0, abs=1e-12)
    assert stats["mean"] == pytest.approx(1.0, abs=1e-12)


def test_stats_requires_two_profiles():
    with pytest.raises(ValueError):
        evaluation.cross_distance_stats({"a": dist({"x": 1.0})})
    with pytest.raises(ValueError):
        evaluation.cross_distance_stats({"a": dist({"x": 1.0})}, {})


def test_stats_across_two_communities():
    ma = {"a": dist({"x": 1.0})}
    mb = {"b": dist({"x": 1.0}), "c": dist({"y": 1.0})}
    stats = evaluation.cross_distance_stats(ma, mb)
    assert stats["min"] == 0.0
    assert stats["max"] == pytest.approx(1.0, abs=1e-12)


# --- ranking ---------------------------------------------------------------------


def test_rank_exact_copy_first():
    source = dist({"x": 0.5, "y": 0.5})
    targets = {
        "copy": dist({"x": 0.5, "y": 0.5}),
        "other": dist({"z": 1.0}),
    }
    ranked = evaluation.rank_candidates(source, targets)
    assert ranked[0][0] == "copy"
    assert ranked[0][1] == 0.0


def test_rank_empty_targets():
    assert evaluation.rank_candidates(dist({"x": 1.0}), {}) == []


def test_rank_orders_by_distance():
    source = dist({"x": 1.0})
    targets = {
        "far": dist({"z": 1.0}),
        "near": dist({"x": 0.9, "z": 0.1}),
        "mid": dist({"x": 0.5, "z": 0.5}),
    }
    ranked = [key for key, _ in evaluation.rank_candidates(source, targets)]
    assert ranked == ["near", "mid", "far"]


def test_rank_ties_broken_by_key():
    source = dist({"x": 1.0})
    targets = {"b": dist({"x": 1.0}), "a": dist({"x": 1.0})}
    ranked = [key for key, _ in evaluation.rank_candidates(source, targets)]
    assert ranked == ["a", "b"]


def test_rank_rejects_empty_source():
    with pytest.raises(ValueError):
        evaluation.rank_candidates(dist({}), {"a": dist({"x": 1.0})})


# --- precision -------------------------------------------------------------------


def _paired_models(n, rng):
    """Identical model on both sides per author."""
    models = {f"u{i}": random_distribution(rng) for i in range(n)}
    links = [GroundTruthLink(f"u{i}", f"u{i}") for i in range(n)]
    return models, dict(models), links


def test_precision_identical_corpora():
    rng = np.random.default_rng(52)
    ma, mb, links = _paired_models(8, rng)
    assert evaluation.precision_at_k(links, ma, mb, k=1) == 1.0


def test_precision_k_at_least_candidates():
    rng = np.random.default_rng(53)
    ma, mb, links = _paired_models(6, rng)
    assert evaluation.precision_at_k(links, ma, mb, k=6) == 1.0
    assert evaluation.precision_at_k(links, ma, mb, k=100) == 1.0


def test_precision_requires_links_and_valid_k():
    rng = np.random.default_rng(54)
    ma, mb, _ = _paired_models(3, rng)
    with pytest.raises(ValueError):
        evaluation.precision_at_k([], ma, mb, k=1)
    with pytest.raises(ValueError):
        evaluation.precision_at_k([GroundTruthLink("u0", "u0")], ma, mb, k=0)
    with pytest.raises(ValueError, match="not in source"):
        evaluation.precision_at_k([GroundTruthLink("zz", "u0")], ma, mb, k=1)


def test_precision_monotone_in_k():
    rng = np.random.default_rng(55)
    ma = {f"u{i}": random_distribution(rng) for i in range(10)}
    mb = {f"u{i}": random_distribution(rng) for i in range(10)}
    links = [GroundTruthLink(f"u{i}", f"u{i}") for i in range(10)]
    values = [evaluation.precision_at_k(links, ma, mb, k=k) for k in (1, 2, 4, 8, 10)]
    assert values == sorted(values)


# --- binned precision ---------------------------------------------------------------


def test_bins_partition_all_links():
    rng = np.random.default_rng(56)
    ma = {f"u{i}": random_distribution(rng) for i in range(20)}
    mb = {f"u{i}": random_distribution(rng) for i in range(20)}
    links = [GroundTruthLink(f"u{i}", f"u{i}") for i in range(20)]
    report = evaluation.anon_vs_precision(links, ma, mb, k=3)
    assert sum(b.pair_count for b in report.bins) == len(links)
    for b in report.bins:
        assert 0.0 <= b.precision <= 1.0
        assert b.size_high - b.size_low == evaluation.BIN_WIDTH - 1


def test_single_pair_single_bin():
    ma = {"u0": dist({"x": 1.0}), "u1": dist({"q": 1.0})}
    mb = {"u0": dist({"x": 0.9, "y": 0.1}), "u1": dist({"z": 1.0})}
    report = evaluation.anon_vs_precision([GroundTruthLink("u0", "u0")], ma, mb, k=1)
    assert len(report.bins) == 1
    assert report.bins[0].pair_count == 1
    assert report.bins[0].precision in (0.0, 1.0)


# --- scatter --------------------------------------------------------------------------


def test_scatter_matching_below_average_for_split_halves():
    rng = np.random.default_rng(57)
    ma, mb, links = _paired_models(6, rng)
    report = evaluation.matched_vs_average_scatter(links, ma, mb)
    assert report.fraction_below == 1.0
    for row in report.rows:
        assert row.matching == 0.0
        assert row.avg_nonmatching > 0.0


def test_scatter_adversarial_point_above_diagonal():
    # source u0 equals the non-matching target u1, not its own counterpart
    ma = {"u0": dist({"x": 1.0}), "u1": dist({"w": 1.0})}
    mb = {"u0": dist({"z": 1.0}), "u1": dist({"x": 1.0})}
    report = evaluation.matched_vs_average_scatter([GroundTruthLink("u0", "u0")], ma, mb)
    row = report.rows[0]
    assert row.matching > row.avg_nonmatching
    assert report.fraction_below == 0.0


def test_scatter_rows_match_matrix_recomputation():
    rng = np.random.default_rng(58)
    ma = {f"u{i}": random_distribution(rng) for i in range(7)}
    mb = {f"u{i}": random_distribution(rng) for i in range(7)}
    links = [GroundTruthLink(f"u{i}", f"u{i}") for i in range(7)]
    report = evaluation.matched_vs_average_scatter(links, ma, mb)
    keys_b = sorted(mb)
    dists_a = [lm.to_distribution(m) if isinstance(m, lm.UnigramModel) else m for m in
               (ma[k] for k in sorted(ma))]
    dists_b = [mb[k] for k in keys_b]
    grid = metric.cross_distances(dists_a, dists_b)
    for row in report.rows:
        i = sorted(ma).index(row.source)
        j = keys_b.index(row.target)
        expected_match = grid[i, j]
        expected_avg = (grid[i].sum() - expected_match) / (len(keys_b) - 1)
        assert row.matching == expected_match
        assert row.avg_nonmatching == pytest.approx(expected_avg, abs=1e-15)


def test_scatter_needs_two_targets():
    ma = {"u0": dist({"x": 1.0})}
    mb = {"u0": dist({"x": 1.0})}
    with pytest.raises(ValueError):
        evaluation.matched_vs_average_scatter([GroundTruthLink("u0", "u0")], ma, mb)


# --- synthetic corpus --------------------------------------------------------------


def test_synth_deterministic_bytes():
    a = evaluation.synth_corpus(10, 3, comments_per_user=20, rng_seed=99)
    b = evaluation.synth_corpus(10, 3, comments_per_user=20, rng_seed=99)
    assert evaluation.comments_to_jsonl(a.comments_a) == evaluation.comments_to_jsonl(b.comments_a)
    assert evaluation.comments_to_jsonl(a.comments_b) == evaluation.comments_to_jsonl(b.comments_b)
    c = evaluation.synth_corpus(10, 3, comments_per_user=20, rng_seed=100)
    assert evaluation.comments_to_jsonl(a.comments_a) != evaluation.comments_to_jsonl(c.comments_a)


def test_synth_structure():
    corp = evaluation.synth_corpus(5, 2, comments_per_user=8, rng_seed=1)
    assert {c.community_id for c in corp.comments_a} == {"alpha"}
    assert {c.community_id for c in corp.comments_b} == {"beta"}
    assert len(corp.links) == 5
    authors = {c.author_id for c in corp.comments_a}
    assert authors == {f"u{i}" for i in range(5)}


def test_synth_rejects_bad_sizes():
    with pytest.raises(ValueError):
        evaluation.synth_corpus(1, 3)
    with pytest.raises(ValueError):
        evaluation.synth_corpus(5, 1)
    with pytest.raises(ValueError):
        evaluation.synth_corpus(5, 3, comments_per_user=2)
    with pytest.raises(ValueError):
        evaluation.synth_corpus(5, 3, idiosyncrasy=1.5)


def _models_from(corp):
    cfg = corpus.NormalizationConfig.default()
    streams = corpus.aggregate_profiles(corp.comments_a + corp.comments_b, cfg)
    pm, _, _ = lm.build_models(streams)
    ma = {a: m for (a, c), m in pm.items() if c == corp.communities[0]}
    mb = {a: m for (a, c), m in pm.items() if c == corp.communities[1]}
    return ma, mb


def test_synth_idiosyncrasy_extremes():
    corp0 = evaluation.synth_corpus(30, 5, comments_per_user=40, rng_seed=11, idiosyncrasy=0.0)
    ma, mb = _models_from(corp0)
    p0 = evaluation.precision_at_k(corp0.links, ma, mb, k=1)
    assert p0 <= 3 / 30  # indistinguishable users: about 1/n
    corp1 = evaluation.synth_corpus(30, 5, comments_per_user=40, rng_seed=11, idiosyncrasy=1.0)
    ma, mb = _models_from(corp1)
    p1 = evaluation.precision_at_k(corp1.links, ma, mb, k=1)
    assert p1 >= 0.9


# --- experiment driver ---------------------------------------------------------------


def test_run_experiment_and_csvs(tmp_path):
    corp = evaluation.synth_corpus(12, 3, comments_per_user=16, rng_seed=5)
    ma, mb = _models_from(corp)
    result = evaluation.run_experiment(ma, mb, ks=(1, 5), community_a="alpha", community_b="beta")
    assert set(result.precisions) == {1, 5}
    assert result.precisions[5] >= result.precisions[1]
    assert len(result.scatter.rows) == 12
    assert len(result.anon_sizes) == 12
    files = evaluation.write_experiment_csvs(result, tmp_path / "out", {"seed": 5})
    names = {f.split("/")[-1] for f in files}
    assert names == {
        "stats.csv",
        "scatter.csv",
        "precision_overall.csv",
        "precision_bins.csv",
        "metadata.json",
    }
    header = (tmp_path / "out" / "scatter.csv").read_text().splitlines()[0]
    assert header == "source,target,avg_nonmatching_distance,matching_distance,below_diagonal"


def test_run_experiment_links_from_shared_pseudonyms():
    rng = np.random.default_rng(61)
    ma = {"u0": random_distribution(rng), "u1": random_distribution(rng), "only_a": random_distribution(rng)}
    mb = {"u0": random_distribution(rng), "u1": random_distribution(rng), "only_b": random_distribution(rng)}
    result = evaluation.run_experiment(ma, mb, ks=(1,))
    assert sorted(l.source for l in result.links) == ["u0", "u1"]


def test_run_experiment_worker_determinism(tmp_path):
    corp = evaluation.synth_corpus(10, 3, comments_per_user=12, rng_seed=6)
    ma, mb = _models_from(corp)
    r1 = evaluation.run_experiment(ma, mb, ks=(1,), workers=1)
    r2 = evaluation.run_experiment(ma, mb, ks=(1,), workers=3)
    evaluation.write_experiment_csvs(r1, tmp_path / "w1")
    evaluation.write_experiment_csvs(r2, tmp_path / "w3")
    for name in ("stats.csv", "scatter.csv", "precision_overall.csv", "precision_bins.csv"):
        assert (tmp_path / "w1" / name).read_bytes() == (tmp_path / "w3" / name).read_bytes()
