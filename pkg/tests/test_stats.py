from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from connprof import (
    ChoiceDistribution,
    ProfilingError,
    mode_agreement,
    mode_connector,
    pair_spread,
    pooled_report,
    profile_correspondence,
    rank_transform,
    spread,
    text_report,
)
from connprof.dialog import SessionMetrics
from connprof.stats import GRANULARITY_CATEGORY, WEIGHTING_POOLED_PAIRS

from conftest import make_profile


def brute_force_mu2(values):
    """Direct evaluation of the spread formula; the independent oracle."""
    mean = sum(values) / len(values)
    return sum((x - mean) ** 2 for x in values) / len(values)


def dist(counts, pair_index=2, granularity=GRANULARITY_CATEGORY):
    return ChoiceDistribution.from_counts(pair_index, granularity, counts)


ORDER = [f"L{i}" for i in range(12)]
ORDER_XYZ = ["X", "Y", "Z"]


def profiles_with_category_pattern(doc_id, columns, inv):
    """One profile per evaluator; columns[pair_offset] = list of category ids."""
    n_evaluators = len(columns[0])
    first_conjunct = {}
    for conjunct in inv.conjuncts:
        first_conjunct.setdefault(conjunct.category_id, conjunct.id)
    out = []
    for evaluator in range(n_evaluators):
        labels = []
        for per_pair in columns:
            category_id = per_pair[evaluator]
            labels.append((first_conjunct[category_id], category_id))
        out.append(make_profile(doc_id, f"ev{evaluator}", labels))
    return out


class TestRankTransform:
    def test_worked_example_7_2_1(self):
        sample = rank_transform(dist({"X": 7, "Y": 2, "Z": 1}), ["X", "Y", "Z"])
        assert sample.values == (1, 1, 1, 1, 1, 1, 1, 2, 2, 3)
        assert sample.label_ranks == {"X": 1, "Y": 2, "Z": 3}

    def test_unanimous(self):
        assert rank_transform(dist({"X": 5}), ["X"]).values == (1, 1, 1, 1, 1)

    def test_tie_broken_by_declared_order(self):
        sample = rank_transform(dist({"Y": 2, "X": 2}), ["X", "Y"])
        assert sample.values == (1, 1, 2, 2)
        assert sample.label_ranks == {"X": 1, "Y": 2}

    def test_unknown_label_rejected(self):
        with pytest.raises(ProfilingError) as err:
            rank_transform(dist({"Q": 1}), ["X"])
        assert err.value.code == "unknown-label"


class TestSpread:
    def test_worked_example_value(self):
        result = spread(rank_transform(dist({"X": 7, "Y": 2, "Z": 1}), ORDER_XYZ))
        assert result.mu2 == pytest.approx(0.44, abs=1e-12)
        assert result.mean_rank == pytest.approx(1.4, abs=1e-12)
        assert result.n_evaluators == 10

    def test_unanimity_is_zero(self):
        assert spread(rank_transform(dist({"X": 3}), ORDER_XYZ)).mu2 == 0.0

    def test_two_way_split(self):
        result = spread(rank_transform(dist({"X": 1, "Y": 1}), ORDER_XYZ))
        assert result.mu2 == pytest.approx(0.25, abs=1e-12)

    def test_matches_brute_force_on_random_distributions(self):
        rng = random.Random(13)
        for _ in range(500):
            k = rng.randrange(1, 12)
            counts = {ORDER[i]: rng.randrange(1, 9) for i in range(k)}
            sample = rank_transform(dist(counts), ORDER)
            assert spread(sample).mu2 == pytest.approx(brute_force_mu2(sample.values), abs=1e-12)

    @given(st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=11))
    @settings(max_examples=200, deadline=None)
    def test_relabeling_invariance(self, raw_counts):
        counts = {ORDER[i]: c for i, c in enumerate(raw_counts)}
        base = rank_transform(dist(counts), ORDER)
        rng = random.Random(sum(raw_counts))
        permuted_order = ORDER[:]
        rng.shuffle(permuted_order)
        relabel = {old: new for old, new in zip(ORDER, permuted_order)}
        permuted_counts = {relabel[label]: count for label, count in counts.items()}
        permuted = rank_transform(dist(permuted_counts), ORDER)
        assert sorted(base.values) == sorted(permuted.values)
        assert spread(base).mu2 == spread(permuted).mu2

    @given(st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=11))
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, raw_counts):
        counts = {ORDER[i]: c for i, c in enumerate(raw_counts)}
        sample = rank_transform(dist(counts), ORDER)
        result = spread(sample)
        k = len(counts)
        assert result.mu2 >= 0
        assert max(sample.values) == k <= result.n_evaluators
        assert result.mu2 <= ((k - 1) / 2) ** 2 + 1e-12
        if k == 1:
            assert result.mu2 == 0.0


class TestPairLevel:
    def test_pair_spread_from_profiles(self, inv):
        columns = [["cat-addition"] * 7 + ["cat-contrast"] * 2 + ["cat-result"]]
        profiles = profiles_with_category_pattern("d", columns, inv)
        result = pair_spread(profiles, 2, GRANULARITY_CATEGORY, inv)
        assert result.mu2 == pytest.approx(0.44, abs=1e-12)

    def test_single_profile_spread_zero(self, inv):
        profiles = profiles_with_category_pattern("d", [["cat-addition"]], inv)
        assert pair_spread(profiles, 2, GRANULARITY_CATEGORY, inv).mu2 == 0.0

    def test_pair_out_of_range(self, inv):
        profiles = profiles_with_category_pattern("d", [["cat-addition"]], inv)
        with pytest.raises(ProfilingError) as err:
            pair_spread(profiles, 3, GRANULARITY_CATEGORY, inv)
        assert err.value.code == "pair-out-of-range"

    def test_mode_connector(self, inv):
        columns = [["cat-addition"] * 7 + ["cat-contrast"] * 2 + ["cat-result"]]
        profiles = profiles_with_category_pattern("d", columns, inv)
        assert mode_connector(profiles, 2, GRANULARITY_CATEGORY, inv) == "cat-addition"

    def test_mode_tie_goes_to_inventory_order(self, inv):
        columns = [["cat-contrast"] * 2 + ["cat-addition"] * 2]
        profiles = profiles_with_category_pattern("d", columns, inv)
        assert mode_connector(profiles, 2, GRANULARITY_CATEGORY, inv) == "cat-addition"

    def test_mode_is_order_insensitive(self, inv):
        columns = [["cat-addition"] * 3 + ["cat-result"] * 5 + ["cat-contrast"] * 2]
        profiles = profiles_with_category_pattern("d", columns, inv)
        rng = random.Random(3)
        expected = mode_connector(profiles, 2, GRANULARITY_CATEGORY, inv)
        for _ in range(5):
            shuffled = profiles[:]
            rng.shuffle(shuffled)
            assert mode_connector(shuffled, 2, GRANULARITY_CATEGORY, inv) == expected


class TestModeAgreement:
    def test_identical_groups(self, inv):
        columns = [["cat-addition"] * 5 for _ in range(8)]
        a = profiles_with_category_pattern("d", columns, inv)
        result = mode_agreement(a, a, GRANULARITY_CATEGORY, inv)
        assert result.fraction == 1.0

    def test_disjoint_unanimous_groups(self, inv):
        a = profiles_with_category_pattern("d", [["cat-addition"] * 5 for _ in range(8)], inv)
        b = profiles_with_category_pattern("d", [["cat-contrast"] * 5 for _ in range(8)], inv)
        assert mode_agreement(a, b, GRANULARITY_CATEGORY, inv).fraction == 0.0

    def test_half_agreement(self, inv):
        a_cols = [["cat-addition"] * 5 for _ in range(8)]
        b_cols = [["cat-addition"] * 5 if i < 4 else ["cat-result"] * 5 for i in range(8)]
        a = profiles_with_category_pattern("d", a_cols, inv)
        b = profiles_with_category_pattern("d", b_cols, inv)
        result = mode_agreement(a, b, GRANULARITY_CATEGORY, inv)
        assert result.fraction == 0.5
        assert sum(1 for *_rest, equal in result.per_pair if equal) == 4


class TestProfileCorrespondence:
    def test_identical(self, inv):
        p = profiles_with_category_pattern("d", [["cat-addition"]] * 8, inv)[0]
        assert profile_correspondence(p, p, GRANULARITY_CATEGORY) == 1.0

    def test_all_different(self, inv):
        p = profiles_with_category_pattern("d", [["cat-addition"]] * 8, inv)[0]
        q = profiles_with_category_pattern("d", [["cat-contrast"]] * 8, inv)[0]
        assert profile_correspondence(p, q, GRANULARITY_CATEGORY) == 0.0

    def test_three_of_eight(self, inv):
        p_cols = [["cat-addition"]] * 8
        q_cols = [["cat-addition"]] * 3 + [["cat-result"]] * 5
        p = profiles_with_category_pattern("d", p_cols, inv)[0]
        q = profiles_with_category_pattern("d", q_cols, inv)[0]
        assert profile_correspondence(p, q, GRANULARITY_CATEGORY) == 0.375
        assert profile_correspondence(q, p, GRANULARITY_CATEGORY) == 0.375

    def test_length_mismatch(self, inv):
        p = profiles_with_category_pattern("d", [["cat-addition"]] * 8, inv)[0]
        q = profiles_with_category_pattern("d", [["cat-addition"]] * 7, inv)[0]
        with pytest.raises(ProfilingError) as err:
            profile_correspondence(p, q, GRANULARITY_CATEGORY)
        assert err.value.code == "length-mismatch"


class TestTextReport:
    def test_constant_spread_corpus(self, inv):
        columns = [["cat-addition"] * 7 + ["cat-contrast"] * 2 + ["cat-result"] for _ in range(8)]
        profiles = profiles_with_category_pattern("d", columns, inv)
        report = text_report(profiles, [], inv)
        assert len(report.per_pair) == 8
        assert report.mean_cat == pytest.approx(0.44, abs=1e-12)
        assert report.n_evaluators == 10

    def test_single_profile_means_zero(self, inv):
        profiles = profiles_with_category_pattern("d", [["cat-addition"]] * 4, inv)
        report = text_report(profiles, [], inv)
        assert report.mean_cat == 0.0
        assert report.mean_con == 0.0

    def test_mixed_documents_rejected(self, inv):
        a = profiles_with_category_pattern("a", [["cat-addition"]] * 4, inv)
        b = profiles_with_category_pattern("b", [["cat-addition"]] * 4, inv)
        with pytest.raises(ProfilingError) as err:
            text_report(a + b, [], inv)
        assert err.value.code == "mixed-documents"

    def test_metrics_aggregation(self, inv):
        profiles = profiles_with_category_pattern("d", [["cat-addition"] * 2] * 4, inv)
        metrics = [
            SessionMetrics(total_ms=60000, per_pair_ms={}, backtrack_count=2),
            SessionMetrics(total_ms=120000, per_pair_ms={}, backtrack_count=4),
        ]
        report = text_report(profiles, metrics, inv)
        assert report.mean_time_ms == 90000
        assert report.mean_backtracks == 3.0

    def test_pooled_pairs_weighting(self, inv):
        # pair 1: unanimous X; pair 2: unanimous Y. Per-pair mean is 0, but
        # pooling all pairs into one distribution gives a 50/50 split.
        columns = [["cat-addition"] * 5, ["cat-contrast"] * 5]
        profiles = profiles_with_category_pattern("d", columns, inv)
        per_pair = text_report(profiles, [], inv)
        pooled_pairs = text_report(profiles, [], inv, pair_weighting=WEIGHTING_POOLED_PAIRS)
        assert per_pair.mean_cat == 0.0
        assert pooled_pairs.mean_cat == pytest.approx(0.25, abs=1e-12)


class TestPooledReport:
    def test_same_choices_everywhere(self, inv):
        a = profiles_with_category_pattern("a", [["cat-addition"] * 5] * 8, inv)
        b = profiles_with_category_pattern("b", [["cat-addition"] * 5] * 8, inv)
        report = pooled_report([("a", a), ("b", b)], inv)
        assert report.mean_cat == 0.0
        assert report.document_id == "a+b"
        assert report.n_evaluators == 10

    def test_disjoint_unanimous_groups(self, inv):
        a = profiles_with_category_pattern("a", [["cat-addition"] * 5] * 8, inv)
        b = profiles_with_category_pattern("b", [["cat-contrast"] * 5] * 8, inv)
        report = pooled_report([("a", a), ("b", b)], inv)
        assert report.mean_cat == pytest.approx(0.25, abs=1e-12)

    def test_misaligned_groups_rejected(self, inv):
        a = profiles_with_category_pattern("a", [["cat-addition"] * 5] * 8, inv)
        b = profiles_with_category_pattern("b", [["cat-addition"] * 5] * 7, inv)
        with pytest.raises(ProfilingError) as err:
            pooled_report([("a", a), ("b", b)], inv)
        assert err.value.code == "misaligned-documents"

    def test_pooling_identity_on_single_group(self, inv):
        rng = random.Random(23)
        category_ids = [c.id for c in inv.categories]
        columns = [[rng.choice(category_ids) for _ in range(9)] for _ in range(6)]
        profiles = profiles_with_category_pattern("a", columns, inv)
        single = pooled_report([("a", profiles)], inv)
        plain = text_report(profiles, [], inv)
        assert single.per_pair == plain.per_pair
        assert single.mean_cat == plain.mean_cat
        assert single.mean_con == plain.mean_con
