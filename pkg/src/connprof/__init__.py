"""connprof: text-level MT evaluation by connectivity profiling.

Profiles a text as the ordered list of conjuncts a human evaluator inserts
between consecutive sentences, via a guided question/answer dialog, and
compares profiles across evaluators and languages with a frequency-rank
spread statistic.
"""

from .dialog import (
    Answer,
    DialogNode,
    DialogTree,
    SessionEvent,
    SessionMetrics,
    SessionState,
    backtrack,
    choose_answer,
    metrics_from_events,
    replay,
    select_conjunct,
    session_metrics,
    start_session,
    submit_topic_comment,
    validate_tree,
)
from .errors import ProfilingError
from .model import (
    AlignmentReport,
    Category,
    Conjunct,
    ConjunctInventory,
    ConnectivityProfile,
    RelationChoice,
    Sentence,
    TextDocument,
    TopicComment,
    Violation,
    assemble_profile,
    check_alignment,
    profile_slots,
    validate_inventory,
)
from .stats import (
    ChoiceDistribution,
    ModeAgreement,
    PairStats,
    RankedSample,
    SpreadResult,
    TextReport,
    mode_agreement,
    mode_connector,
    pair_spread,
    pooled_report,
    profile_correspondence,
    rank_transform,
    spread,
    text_report,
)
from .store import Project

__version__ = "0.1.0"

__all__ = [
    "AlignmentReport",
    "Answer",
    "Category",
    "ChoiceDistribution",
    "Conjunct",
    "ConjunctInventory",
    "ConnectivityProfile",
    "DialogNode",
    "DialogTree",
    "ModeAgreement",
    "PairStats",
    "ProfilingError",
    "Project",
    "RankedSample",
    "RelationChoice",
    "Sentence",
    "SessionEvent",
    "SessionMetrics",
    "SessionState",
    "SpreadResult",
    "TextDocument",
    "TextReport",
    "TopicComment",
    "Violation",
    "assemble_profile",
    "backtrack",
    "check_alignment",
    "choose_answer",
    "metrics_from_events",
    "mode_agreement",
    "mode_connector",
    "pair_spread",
    "pooled_report",
    "profile_correspondence",
    "profile_slots",
    "rank_transform",
    "replay",
    "select_conjunct",
    "session_metrics",
    "spread",
    "start_session",
    "submit_topic_comment",
    "text_report",
    "validate_inventory",
    "validate_tree",
]
