"""Domain model: texts, conjunct inventories, and connectivity profiles.

A connectivity profile of an n-sentence text is the ordered list of the n-1
conjuncts an evaluator inserted between consecutive sentences. Conjuncts are
grouped into categories that stay hidden from the evaluator; the declaration
order of categories and conjuncts in an inventory is the tie-break order used
everywhere downstream.

All types are immutable values; the operations here are pure functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ProfilingError

_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._+-]*$")


def is_valid_id(value: str) -> bool:
    """Artifact ids double as file names, so keep them filesystem-safe."""
    return bool(_ID_RE.match(value))


@dataclass(frozen=True)
class Violation:
    """One validation finding. Violations are data, not exceptions."""

    code: str
    message: str
    subject: str | None = None

    def __str__(self) -> str:
        if self.subject:
            return f"{self.code} [{self.subject}]: {self.message}"
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class Sentence:
    """One sentence of a document; ``index`` is its 1-based position."""

    index: int
    surface: str
    language: str

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"sentence index must be >= 1, got {self.index}")
        if not self.surface.strip():
            raise ValueError(f"sentence {self.index} has an empty surface")


@dataclass(frozen=True)
class TextDocument:
    """A pre-segmented, language-tagged text.

    Documents linked by the same ``alignment_group`` are translations of one
    source and are expected to have identical sentence counts.
    """

    id: str
    language: str
    sentences: tuple[Sentence, ...]
    alignment_group: str | None = None

    def __post_init__(self):
        if not self.sentences:
            raise ValueError(f"document {self.id!r} has no sentences")
        indices = [s.index for s in self.sentences]
        if indices != list(range(1, len(indices) + 1)):
            raise ValueError(
                f"document {self.id!r}: sentence indices must be exactly 1..n, got {indices}"
            )

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    def sentence(self, index: int) -> Sentence:
        return self.sentences[index - 1]


@dataclass(frozen=True)
class Category:
    """A hidden semantic grouping of conjuncts. Evaluators never see these."""

    id: str
    label: str


@dataclass(frozen=True)
class Conjunct:
    """A sentence connective with per-language display forms."""

    id: str
    category_id: str
    surface_forms: dict[str, str]
    gloss: str | None = None


@dataclass(frozen=True)
class ConjunctInventory:
    """Ordered categories and conjuncts; declaration order breaks all ties."""

    id: str
    categories: tuple[Category, ...]
    conjuncts: tuple[Conjunct, ...]

    def category_order(self) -> list[str]:
        return [c.id for c in self.categories]

    def conjunct_order(self) -> list[str]:
        return [c.id for c in self.conjuncts]

    def conjunct_by_id(self, conjunct_id: str) -> Conjunct:
        for c in self.conjuncts:
            if c.id == conjunct_id:
                return c
        raise ProfilingError("unknown-conjunct", f"conjunct {conjunct_id!r} not in inventory {self.id!r}")

    def category_of(self, conjunct_id: str) -> str:
        return self.conjunct_by_id(conjunct_id).category_id

    def languages(self) -> list[str]:
        """Languages declared anywhere in the inventory, in first-seen order."""
        seen: list[str] = []
        for c in self.conjuncts:
            for lang in c.surface_forms:
                if lang not in seen:
                    seen.append(lang)
        return seen


@dataclass(frozen=True)
class RelationChoice:
    """The conjunct chosen for the relation between sentences i-1 and i.

    ``category_id`` is denormalized from the inventory at assembly time so
    reports never need the inventory at read time.
    """

    pair_index: int
    conjunct_id: str
    category_id: str = ""

    def __post_init__(self):
        if self.pair_index < 2:
            raise ValueError(f"pair_index must be >= 2, got {self.pair_index}")


@dataclass(frozen=True)
class ConnectivityProfile:
    """Ordered list of n-1 relation choices for an n-sentence document."""

    document_id: str
    evaluator_id: str
    choices: tuple[RelationChoice, ...]

    def __post_init__(self):
        if not self.choices:
            raise ValueError(f"profile for {self.document_id!r} has no choices")
        indices = [c.pair_index for c in self.choices]
        if indices != list(range(2, len(indices) + 2)):
            raise ValueError(
                f"profile for {self.document_id!r}: pair indices must be exactly 2..n, got {indices}"
            )

    @property
    def pair_indices(self) -> list[int]:
        return [c.pair_index for c in self.choices]

    def choice_at(self, pair_index: int) -> RelationChoice:
        offset = pair_index - 2
        if offset < 0 or offset >= len(self.choices):
            raise ProfilingError("pair-out-of-range", f"pair {pair_index} not covered by profile")
        return self.choices[offset]


@dataclass(frozen=True)
class TopicComment:
    """Topics and comments extracted for one sentence pair (full mode only).

    ``intra_pair_conjuncts`` records any conjuncts placed between multiple
    topic/comment pairs within the sentence; they are logged but never scored.
    """

    pair_index: int
    topics: tuple[str, ...]
    comments: tuple[str, ...]
    intra_pair_conjuncts: tuple[str, ...] = ()


@dataclass(frozen=True)
class AlignmentReport:
    """Result of checking whether two documents may be pooled."""

    aligned: bool
    count_match: bool
    group_match: bool
    reasons: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Operations


def validate_inventory(inv: ConjunctInventory) -> list[Violation]:
    """Structural checks on an inventory; an empty list means valid.

    Reports duplicate ids, conjuncts pointing at unknown categories, empty
    categories, and conjuncts missing a surface form for a language that any
    other conjunct declares.
    """
    violations: list[Violation] = []

    seen_cats: set[str] = set()
    for cat in inv.categories:
        if cat.id in seen_cats:
            violations.append(Violation("duplicate-id", f"duplicate category id {cat.id!r}", cat.id))
        seen_cats.add(cat.id)

    seen_cons: set[str] = set()
    for con in inv.conjuncts:
        if con.id in seen_cons:
            violations.append(Violation("duplicate-id", f"duplicate conjunct id {con.id!r}", con.id))
        seen_cons.add(con.id)
        if con.category_id not in seen_cats:
            violations.append(
                Violation(
                    "dangling-category",
                    f"conjunct {con.id!r} references unknown category {con.category_id!r}",
                    con.id,
                )
            )

    populated = {con.category_id for con in inv.conjuncts}
    for cat in inv.categories:
        if cat.id not in populated:
            violations.append(Violation("empty-category", f"category {cat.id!r} has no conjuncts", cat.id))

    declared = inv.languages()
    for con in inv.conjuncts:
        for lang in declared:
            if lang not in con.surface_forms:
                violations.append(
                    Violation(
                        "missing-surface-form",
                        f"conjunct {con.id!r} has no surface form for language {lang!r}",
                        con.id,
                    )
                )
        for lang, form in con.surface_forms.items():
            if not form.strip():
                violations.append(
                    Violation(
                        "empty-surface-form",
                        f"conjunct {con.id!r} has an empty surface form for {lang!r}",
                        con.id,
                    )
                )

    return violations


def profile_slots(doc: TextDocument) -> list[int]:
    """Pair indices to be filled for ``doc``: exactly [2, 3, ..., n]."""
    n = doc.sentence_count
    if n < 2:
        raise ProfilingError(
            "document-too-short",
            f"document {doc.id!r} has {n} sentence(s); at least 2 are required",
        )
    return list(range(2, n + 1))


def check_alignment(a: TextDocument, b: TextDocument) -> AlignmentReport:
    """Check whether profiles of ``a`` and ``b`` may be pooled.

    Pooling requires equal sentence counts and a shared alignment group.
    A document is trivially aligned with itself.
    """
    count_match = a.sentence_count == b.sentence_count
    if a.id == b.id:
        group_match = True
    else:
        group_match = a.alignment_group is not None and a.alignment_group == b.alignment_group
    reasons = []
    if not count_match:
        reasons.append(
            f"sentence count mismatch: {a.id} has {a.sentence_count}, {b.id} has {b.sentence_count}"
        )
    if not group_match:
        reasons.append(f"documents {a.id} and {b.id} do not share an alignment group")
    return AlignmentReport(
        aligned=count_match and group_match,
        count_match=count_match,
        group_match=group_match,
        reasons=tuple(reasons),
    )


def assemble_profile(
    doc: TextDocument,
    inv: ConjunctInventory,
    choices: list[RelationChoice],
    evaluator_id: str,
) -> ConnectivityProfile:
    """Build a profile from per-pair choices, in any input order.

    Each pair index 2..n must be covered exactly once and every conjunct must
    exist in the inventory; category ids are (re)derived from the inventory.
    """
    slots = profile_slots(doc)
    by_pair: dict[int, RelationChoice] = {}
    for choice in choices:
        if choice.pair_index in by_pair:
            raise ProfilingError("duplicate-pair", f"pair {choice.pair_index} chosen more than once")
        by_pair[choice.pair_index] = choice

    ordered = []
    for pair_index in slots:
        if pair_index not in by_pair:
            raise ProfilingError("missing-pair", f"no choice for pair {pair_index}")
        raw = by_pair.pop(pair_index)
        category_id = inv.category_of(raw.conjunct_id)  # raises unknown-conjunct
        ordered.append(RelationChoice(pair_index, raw.conjunct_id, category_id))
    if by_pair:
        extra = sorted(by_pair)
        raise ProfilingError("missing-pair", f"choices reference pairs outside 2..{slots[-1]}: {extra}")

    return ConnectivityProfile(doc.id, evaluator_id, tuple(ordered))


# ---------------------------------------------------------------------------
# Wire formats (JSON)


def document_from_json(obj: dict) -> TextDocument:
    """Parse the document file format; sentence index is array position + 1."""
    try:
        language = obj["language"]
        sentences = tuple(
            Sentence(index=i + 1, surface=text, language=language)
            for i, text in enumerate(obj["sentences"])
        )
        return TextDocument(
            id=obj["id"],
            language=language,
            sentences=sentences,
            alignment_group=obj.get("alignment_group"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfilingError("validation-failed", f"malformed document: {exc}") from exc


def document_to_json(doc: TextDocument) -> dict:
    obj: dict = {"id": doc.id, "language": doc.language}
    if doc.alignment_group is not None:
        obj["alignment_group"] = doc.alignment_group
    obj["sentences"] = [s.surface for s in doc.sentences]
    return obj


def validate_document(obj: dict) -> list[Violation]:
    """Checks on a raw document object, for use before construction."""
    violations: list[Violation] = []
    doc_id = obj.get("id")
    if not isinstance(doc_id, str) or not is_valid_id(doc_id):
        violations.append(Violation("invalid-id", f"document id {doc_id!r} is missing or unusable"))
    if not isinstance(obj.get("language"), str) or not obj.get("language"):
        violations.append(Violation("missing-language", "document has no language tag", doc_id))
    sentences = obj.get("sentences")
    if not isinstance(sentences, list):
        violations.append(Violation("missing-sentences", "document has no sentence list", doc_id))
        return violations
    for i, s in enumerate(sentences):
        if not isinstance(s, str) or not s.strip():
            violations.append(Violation("empty-sentence", f"sentence {i + 1} is empty", doc_id))
    if len(sentences) < 2:
        violations.append(
            Violation("too-few-sentences", f"document has {len(sentences)} sentence(s); need >= 2", doc_id)
        )
    return violations


def inventory_from_json(obj: dict) -> ConjunctInventory:
    """Parse the inventory file format (permissive; use validate_inventory)."""
    try:
        categories = tuple(Category(id=c["id"], label=c.get("label", "")) for c in obj["categories"])
        conjuncts = tuple(
            Conjunct(
                id=c["id"],
                category_id=c["category_id"],
                surface_forms=dict(c["surface_forms"]),
                gloss=c.get("gloss"),
            )
            for c in obj["conjuncts"]
        )
        return ConjunctInventory(id=obj["id"], categories=categories, conjuncts=conjuncts)
    except (KeyError, TypeError) as exc:
        raise ProfilingError("validation-failed", f"malformed inventory: {exc}") from exc


def inventory_to_json(inv: ConjunctInventory) -> dict:
    return {
        "id": inv.id,
        "categories": [{"id": c.id, "label": c.label} for c in inv.categories],
        "conjuncts": [
            {
                "id": c.id,
                "category_id": c.category_id,
                "surface_forms": dict(c.surface_forms),
                **({"gloss": c.gloss} if c.gloss is not None else {}),
            }
            for c in inv.conjuncts
        ],
    }


def profile_from_json(obj: dict) -> ConnectivityProfile:
    try:
        choices = tuple(
            RelationChoice(c["pair_index"], c["conjunct_id"], c.get("category_id", ""))
            for c in obj["choices"]
        )
        return ConnectivityProfile(obj["document_id"], obj["evaluator_id"], choices)
    except (KeyError, TypeError, ValueError) as exc:
        raise ProfilingError("validation-failed", f"malformed profile: {exc}") from exc


def profile_to_json(profile: ConnectivityProfile) -> dict:
    return {
        "document_id": profile.document_id,
        "evaluator_id": profile.evaluator_id,
        "choices": [
            {"pair_index": c.pair_index, "conjunct_id": c.conjunct_id, "category_id": c.category_id}
            for c in profile.choices
        ],
    }
