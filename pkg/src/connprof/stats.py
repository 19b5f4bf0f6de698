"""Agreement statistics over connectivity profiles.

The core statistic works on one sentence pair at a time. The choices of a
group of evaluators are counted per label (category or conjunct), labels are
ranked by descending frequency (ties broken by inventory declaration order),
and every evaluator is mapped to the rank of the label they chose. If 7 of 10
evaluators pick X, 2 pick Y and 1 picks Z, the ranked sample is
{1 1 1 1 1 1 1 2 2 3}. The spread of that sample is its population variance
(divide by n, not n-1): 0 means unanimity, larger means more disagreement.

Note the spread depends only on the multiset of counts, never on which labels
were chosen, so it is invariant under relabeling; the tie-break only pins
down the label-to-rank map.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ProfilingError
from .model import ConjunctInventory, ConnectivityProfile

GRANULARITY_CATEGORY = "category"
GRANULARITY_CONJUNCT = "conjunct"
GRANULARITIES = (GRANULARITY_CATEGORY, GRANULARITY_CONJUNCT)

WEIGHTING_PER_PAIR = "per-pair"
WEIGHTING_POOLED_PAIRS = "pooled-pairs"


@dataclass(frozen=True)
class ChoiceDistribution:
    """Counts of label choices for one sentence pair across evaluators."""

    pair_index: int
    granularity: str
    counts: dict[str, int]
    evaluator_total: int

    def __post_init__(self):
        if not self.counts:
            raise ValueError("a choice distribution needs at least one label")
        if any(count < 1 for count in self.counts.values()):
            raise ValueError("all counts must be >= 1")
        if self.evaluator_total != sum(self.counts.values()):
            raise ValueError("evaluator_total must equal the sum of counts")

    @classmethod
    def from_counts(cls, pair_index: int, granularity: str, counts: dict[str, int]) -> "ChoiceDistribution":
        return cls(pair_index, granularity, dict(counts), sum(counts.values()))


@dataclass(frozen=True)
class RankedSample:
    """One rank per evaluator, plus the label-to-rank map that produced it."""

    values: tuple[int, ...]
    label_ranks: dict[str, int]


@dataclass(frozen=True)
class SpreadResult:
    """Population variance and mean of a ranked sample."""

    mu2: float
    mean_rank: float
    n_evaluators: int


@dataclass(frozen=True)
class PairStats:
    """Both-granularity spreads and modes for one sentence pair."""

    pair_index: int
    category: SpreadResult
    conjunct: SpreadResult
    mode_category_id: str
    mode_conjunct_id: str


@dataclass(frozen=True)
class TextReport:
    """Per-pair spreads and their means for one group of evaluators."""

    document_id: str
    n_evaluators: int
    per_pair: tuple[PairStats, ...]
    mean_cat: float
    mean_con: float
    mean_time_ms: float | None = None
    mean_backtracks: float | None = None
    pair_weighting: str = WEIGHTING_PER_PAIR


@dataclass(frozen=True)
class ModeAgreement:
    """Fraction of pairs on which two groups share the most-chosen label."""

    fraction: float
    per_pair: tuple[tuple[int, str, str, bool], ...]  # (pair_index, mode_a, mode_b, equal)


def rank_transform(dist: ChoiceDistribution, label_order: Sequence[str]) -> RankedSample:
    """Map each evaluator's choice to the frequency rank of its label.

    Labels are sorted by descending count, ties broken by position in
    ``label_order`` (inventory declaration order); the label at 1-based sorted
    position r contributes count copies of rank r.
    """
    order_index = {label: i for i, label in enumerate(label_order)}
    unknown = [label for label in dist.counts if label not in order_index]
    if unknown:
        raise ProfilingError("unknown-label", f"labels not in the declared order: {sorted(unknown)}")
    ranked_labels = sorted(dist.counts, key=lambda label: (-dist.counts[label], order_index[label]))
    label_ranks = {label: rank for rank, label in enumerate(ranked_labels, start=1)}
    values: list[int] = []
    for label in ranked_labels:
        values.extend([label_ranks[label]] * dist.counts[label])
    return RankedSample(values=tuple(values), label_ranks=label_ranks)


def spread(sample: RankedSample) -> SpreadResult:
    """Population variance (divide by n) and mean of the ranked values."""
    if not sample.values:
        raise ProfilingError("empty-sample", "cannot compute the spread of an empty sample")
    mean_rank = statistics.fmean(sample.values)
    mu2 = statistics.pvariance(sample.values, mu=mean_rank)
    return SpreadResult(mu2=mu2, mean_rank=mean_rank, n_evaluators=len(sample.values))


def _label_of(profile: ConnectivityProfile, pair_index: int, granularity: str) -> str:
    choice = profile.choice_at(pair_index)
    return choice.category_id if granularity == GRANULARITY_CATEGORY else choice.conjunct_id


def _label_order(inv: ConjunctInventory, granularity: str) -> list[str]:
    if granularity == GRANULARITY_CATEGORY:
        return inv.category_order()
    if granularity == GRANULARITY_CONJUNCT:
        return inv.conjunct_order()
    raise ProfilingError("invalid-config", f"unknown granularity {granularity!r}")


def distribution_at(
    profiles: Sequence[ConnectivityProfile], pair_index: int, granularity: str
) -> ChoiceDistribution:
    """Count the group's choices at one pair, at the requested granularity."""
    if not profiles:
        raise ProfilingError("no-profiles", "at least one profile is required")
    counts: dict[str, int] = {}
    for profile in profiles:
        label = _label_of(profile, pair_index, granularity)
        counts[label] = counts.get(label, 0) + 1
    return ChoiceDistribution.from_counts(pair_index, granularity, counts)


def pair_spread(
    profiles: Sequence[ConnectivityProfile],
    pair_index: int,
    granularity: str,
    inv: ConjunctInventory,
) -> SpreadResult:
    """Spread of the group's choices at one pair."""
    dist = distribution_at(profiles, pair_index, granularity)
    return spread(rank_transform(dist, _label_order(inv, granularity)))


def mode_connector(
    profiles: Sequence[ConnectivityProfile],
    pair_index: int,
    granularity: str,
    inv: ConjunctInventory,
) -> str:
    """The most-chosen label at one pair; ties go to inventory order."""
    dist = distribution_at(profiles, pair_index, granularity)
    order_index = {label: i for i, label in enumerate(_label_order(inv, granularity))}
    return min(dist.counts, key=lambda label: (-dist.counts[label], order_index[label]))


def _common_slots(profiles: Sequence[ConnectivityProfile]) -> list[int]:
    slots = profiles[0].pair_indices
    for profile in profiles[1:]:
        if profile.pair_indices != slots:
            raise ProfilingError(
                "misaligned-documents",
                f"profiles cover different pair ranges ({len(slots)} vs {len(profile.pair_indices)} pairs)",
            )
    return slots


def mode_agreement(
    group_a: Sequence[ConnectivityProfile],
    group_b: Sequence[ConnectivityProfile],
    granularity: str,
    inv: ConjunctInventory,
) -> ModeAgreement:
    """Compare the most-chosen label of two groups pair by pair."""
    if not group_a or not group_b:
        raise ProfilingError("no-profiles", "both groups need at least one profile")
    slots = _common_slots(list(group_a) + list(group_b))
    detail = []
    hits = 0
    for pair_index in slots:
        mode_a = mode_connector(group_a, pair_index, granularity, inv)
        mode_b = mode_connector(group_b, pair_index, granularity, inv)
        equal = mode_a == mode_b
        hits += equal
        detail.append((pair_index, mode_a, mode_b, equal))
    return ModeAgreement(fraction=hits / len(slots), per_pair=tuple(detail))


def profile_correspondence(
    p: ConnectivityProfile, q: ConnectivityProfile, granularity: str
) -> float:
    """Fraction of pairs on which two profiles carry the identical label."""
    if len(p.choices) != len(q.choices):
        raise ProfilingError(
            "length-mismatch", f"profiles have {len(p.choices)} and {len(q.choices)} choices"
        )
    slots = p.pair_indices
    matches = sum(
        _label_of(p, i, granularity) == _label_of(q, i, granularity) for i in slots
    )
    return matches / len(slots)


def _pooled_pairs_spread(
    per_pair_counts: Iterable[dict[str, int]], granularity: str, inv: ConjunctInventory
) -> float:
    merged: dict[str, int] = {}
    for counts in per_pair_counts:
        for label, count in counts.items():
            merged[label] = merged.get(label, 0) + count
    dist = ChoiceDistribution.from_counts(0, granularity, merged)
    return spread(rank_transform(dist, _label_order(inv, granularity))).mu2


def _build_report(
    document_id: str,
    groups: Sequence[Sequence[ConnectivityProfile]],
    inv: ConjunctInventory,
    metrics: Sequence,
    pair_weighting: str,
) -> TextReport:
    """Shared core of text_report and pooled_report.

    Per pair, the choices of all groups are pooled into one distribution;
    with a single group this degenerates to the plain per-text report, which
    is the pooling identity the tests rely on.
    """
    if pair_weighting not in (WEIGHTING_PER_PAIR, WEIGHTING_POOLED_PAIRS):
        raise ProfilingError("invalid-config", f"unknown pair weighting {pair_weighting!r}")
    everyone = [profile for group in groups for profile in group]
    slots = _common_slots(everyone)

    per_pair = []
    cat_counts = []
    con_counts = []
    for pair_index in slots:
        cat_dist = distribution_at(everyone, pair_index, GRANULARITY_CATEGORY)
        con_dist = distribution_at(everyone, pair_index, GRANULARITY_CONJUNCT)
        cat_counts.append(cat_dist.counts)
        con_counts.append(con_dist.counts)
        per_pair.append(
            PairStats(
                pair_index=pair_index,
                category=spread(rank_transform(cat_dist, inv.category_order())),
                conjunct=spread(rank_transform(con_dist, inv.conjunct_order())),
                mode_category_id=mode_connector(everyone, pair_index, GRANULARITY_CATEGORY, inv),
                mode_conjunct_id=mode_connector(everyone, pair_index, GRANULARITY_CONJUNCT, inv),
            )
        )

    if pair_weighting == WEIGHTING_PER_PAIR:
        mean_cat = statistics.fmean(stats.category.mu2 for stats in per_pair)
        mean_con = statistics.fmean(stats.conjunct.mu2 for stats in per_pair)
    else:
        mean_cat = _pooled_pairs_spread(cat_counts, GRANULARITY_CATEGORY, inv)
        mean_con = _pooled_pairs_spread(con_counts, GRANULARITY_CONJUNCT, inv)

    mean_time = statistics.fmean(m.total_ms for m in metrics) if metrics else None
    mean_backtracks = statistics.fmean(m.backtrack_count for m in metrics) if metrics else None

    return TextReport(
        document_id=document_id,
        n_evaluators=len(everyone),
        per_pair=tuple(per_pair),
        mean_cat=mean_cat,
        mean_con=mean_con,
        mean_time_ms=mean_time,
        mean_backtracks=mean_backtracks,
        pair_weighting=pair_weighting,
    )


def text_report(
    profiles: Sequence[ConnectivityProfile],
    metrics: Sequence,
    inv: ConjunctInventory,
    pair_weighting: str = WEIGHTING_PER_PAIR,
) -> TextReport:
    """Report for one document: per-pair spreads, modes, and their means.

    ``metrics`` is a sequence of SessionMetrics for the sessions behind the
    profiles (may be empty, in which case the timing rows are omitted).
    """
    if not profiles:
        raise ProfilingError("no-profiles", "at least one profile is required")
    document_ids = {profile.document_id for profile in profiles}
    if len(document_ids) > 1:
        raise ProfilingError("mixed-documents", f"profiles span documents {sorted(document_ids)}")
    return _build_report(profiles[0].document_id, [profiles], inv, metrics, pair_weighting)


def pooled_report(
    groups: Sequence[tuple[str, Sequence[ConnectivityProfile]]],
    inv: ConjunctInventory,
    pair_weighting: str = WEIGHTING_PER_PAIR,
) -> TextReport:
    """Pool evaluator choices across aligned documents, pair by pair.

    The caller is responsible for checking document alignment (sentence
    counts and alignment groups); here only the profile shapes are checked.
    A single group reproduces its text_report exactly.
    """
    if not groups:
        raise ProfilingError("no-profiles", "at least one group is required")
    for document_id, profiles in groups:
        if not profiles:
            raise ProfilingError("no-profiles", f"group {document_id!r} has no profiles")
        wrong = {p.document_id for p in profiles} - {document_id}
        if wrong:
            raise ProfilingError(
                "mixed-documents", f"group {document_id!r} contains profiles of {sorted(wrong)}"
            )
    label = "+".join(document_id for document_id, _ in groups)
    return _build_report(label, [profiles for _, profiles in groups], inv, [], pair_weighting)
