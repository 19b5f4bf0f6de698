"""Synthetic corpus generation for pipeline and acceptance runs.

A recipe describes documents, evaluator groups, and a per-pair frequency
shape such as [7, 2, 1]: the first k categories of the inventory (in
declaration order) receive evaluators in those proportions, scaled to the
group size by largest remainder. Synthesized evaluators take the shortest
valid dialog path to their target conjunct with zero think time unless a
``step_ms`` timing recipe is given, so the logs replay exactly but claim no
human realism.

Every synthesized session can also be emitted as the equivalent sequence of
HTTP requests, which is how the API-replay checks drive a live server with
the same corpus.
"""

from __future__ import annotations

import json
import math
import random
from collections import deque
from pathlib import Path

from . import dialog
from .defaults import default_dialog_json, default_inventory_json
from .errors import ProfilingError
from .model import ConjunctInventory, TextDocument, TopicComment
from .store import KIND_DIALOG_TREE, KIND_DOCUMENT, KIND_INVENTORY, Project


# Group sizes used when a recipe omits "evaluators", cycled by group position.
DEFAULT_GROUP_SIZES = (14, 13, 7, 7)


class StepClock:
    """Fake clock: starts at ``start_ms`` and advances ``step_ms`` per call."""

    def __init__(self, start_ms: int = 0, step_ms: int = 0):
        self._now = start_ms
        self._step = step_ms

    def __call__(self) -> int:
        now = self._now
        self._now += self._step
        return now


def largest_remainder(weights: list[float], total: int) -> list[int]:
    """Integer counts summing to ``total`` proportional to ``weights``.

    Remainders are distributed by largest fractional part, earlier index
    first on ties, so the result is deterministic.
    """
    if total < 0 or not weights or any(w <= 0 for w in weights):
        raise ValueError("weights must be positive and total nonnegative")
    scale = sum(weights)
    raw = [w / scale * total for w in weights]
    counts = [math.floor(r) for r in raw]
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: total - sum(counts)]:
        counts[i] += 1
    return counts


def shortest_path_to_conjunct(tree: dialog.DialogTree, conjunct_id: str) -> list[int]:
    """Answer indices of the shortest root-to-screen path showing ``conjunct_id``."""
    queue: deque[tuple[str, tuple[int, ...]]] = deque([(tree.root, ())])
    seen = {tree.root}
    while queue:
        node_id, answers = queue.popleft()
        node = tree.node(node_id)
        if node.kind == dialog.KIND_SCREEN and conjunct_id in node.conjuncts:
            return list(answers)
        for index, answer in enumerate(node.answers):
            if answer.target not in seen:
                seen.add(answer.target)
                queue.append((answer.target, answers + (index,)))
    raise ProfilingError("uncovered-conjunct", f"no screen reachable from the root shows {conjunct_id!r}")


def ensure_default_artifacts(project: Project) -> tuple[str, str]:
    """Install the packaged inventory and dialog tree unless already stored."""
    inv_obj = default_inventory_json()
    tree_obj = default_dialog_json()
    if inv_obj["id"] not in project.list_ids(KIND_INVENTORY):
        project.put_artifact(KIND_INVENTORY, inv_obj)
    if tree_obj["id"] not in project.list_ids(KIND_DIALOG_TREE):
        project.put_artifact(KIND_DIALOG_TREE, tree_obj)
    return inv_obj["id"], tree_obj["id"]


def _placeholder_document(doc_id: str, language: str, n_sentences: int, group: str | None) -> dict:
    sentences = [f"Sentence {i} of text {doc_id}." for i in range(1, n_sentences + 1)]
    obj = {"id": doc_id, "language": language, "sentences": sentences}
    if group is not None:
        obj["alignment_group"] = group
    return obj


def _target_conjuncts(inv: ConjunctInventory, spec: dict, k: int) -> list[str]:
    """One target conjunct per recipe slot, each in a distinct category."""
    explicit = spec.get("target_conjuncts")
    if explicit:
        if len(explicit) != k:
            raise ProfilingError("invalid-config", "target_conjuncts must match the recipe length")
        return list(explicit)
    targets = []
    for category in inv.categories[:k]:
        for conjunct in inv.conjuncts:
            if conjunct.category_id == category.id:
                targets.append(conjunct.id)
                break
        else:
            raise ProfilingError("invalid-config", f"category {category.id!r} has no conjunct to target")
    if len(targets) < k:
        raise ProfilingError("invalid-config", f"recipe needs {k} categories, inventory has {len(targets)}")
    return targets


def synthesize(
    project: Project,
    recipe: dict,
    seed: int = 0,
    emit_requests: Path | str | None = None,
) -> dict:
    """Generate documents, session logs, and profiles into ``project``.

    Returns a summary of what was written. Deterministic for a fixed seed:
    output files are byte-identical across runs.
    """
    rng = random.Random(seed)
    language = recipe.get("language", "en")
    alignment_group = recipe.get("alignment_group", "synth")
    mode = recipe.get("mode", dialog.MODE_LAZY)
    step_ms = int(recipe.get("step_ms", 0))

    inventory_id = recipe.get("inventory_id")
    tree_id = recipe.get("dialog_tree_id")
    if inventory_id is None or tree_id is None:
        default_inv, default_tree = ensure_default_artifacts(project)
        inventory_id = inventory_id or default_inv
        tree_id = tree_id or default_tree
    inv = project.get_inventory(inventory_id)
    tree = project.get_dialog_tree(tree_id)

    documents: dict[str, TextDocument] = {}
    created_documents = []
    for spec in recipe.get("documents", []):
        doc_id = spec["id"]
        if doc_id not in project.list_ids(KIND_DOCUMENT):
            obj = _placeholder_document(
                doc_id,
                spec.get("language", language),
                int(spec["sentences"]),
                spec.get("alignment_group", alignment_group),
            )
            project.put_artifact(KIND_DOCUMENT, obj)
            created_documents.append(doc_id)
        documents[doc_id] = project.get_document(doc_id)

    existing = project.session_ids()
    next_ordinal = len([s for s in existing if s.startswith("sess-")]) + 1

    requests: list[dict] = []
    session_ids: list[str] = []
    session_ordinal = 0

    for group_index, group in enumerate(recipe.get("groups", [])):
        doc = documents.get(group["document_id"]) or project.get_document(group["document_id"])
        n_pairs = doc.sentence_count - 1
        evaluators = int(group.get("evaluators", DEFAULT_GROUP_SIZES[group_index % len(DEFAULT_GROUP_SIZES)]))
        group_mode = group.get("mode", mode)

        pair_recipes = group.get("pair_recipes")
        if pair_recipes is None:
            pair_recipes = [group["recipe"]] * n_pairs
        if len(pair_recipes) != n_pairs:
            raise ProfilingError(
                "invalid-config",
                f"group over {doc.id!r} needs {n_pairs} pair recipes, got {len(pair_recipes)}",
            )

        # choice_of[e][pair_index] = target conjunct for evaluator e at that pair
        choice_of: list[dict[int, str]] = [{} for _ in range(evaluators)]
        for offset, shape in enumerate(pair_recipes):
            targets = _target_conjuncts(inv, group, len(shape))
            counts = largest_remainder([float(w) for w in shape], evaluators)
            expanded: list[str] = []
            for target, count in zip(targets, counts):
                expanded.extend([target] * count)
            rng.shuffle(expanded)
            for evaluator, target in enumerate(expanded):
                choice_of[evaluator][offset + 2] = target

        for evaluator in range(evaluators):
            evaluator_id = f"{doc.id}-ev{evaluator + 1:02d}"
            session_id = f"sess-{next_ordinal:04d}"
            next_ordinal += 1
            clock = StepClock(0, step_ms)
            state = dialog.start_session(doc, tree, inv, evaluator_id, group_mode, session_id=session_id, clock=clock)
            requests.append(
                {
                    "op": "create_session",
                    "body": {
                        "document_id": doc.id,
                        "dialog_tree_id": tree.id,
                        "evaluator_id": evaluator_id,
                        "mode": group_mode,
                    },
                }
            )
            for pair in range(2, n_pairs + 2):
                if group_mode == dialog.MODE_FULL:
                    topics = [f"topic of sentence {pair}"]
                    comments = [f"comment of sentence {pair}"]
                    tc = TopicComment(pair_index=pair, topics=tuple(topics), comments=tuple(comments))
                    state = dialog.submit_topic_comment(state, tc)
                    requests.append(
                        {
                            "op": "topic_comment",
                            "session": session_ordinal,
                            "body": {"topics": topics, "comments": comments},
                        }
                    )
                target = choice_of[evaluator][pair]
                for answer_index in shortest_path_to_conjunct(tree, target):
                    state = dialog.choose_answer(state, answer_index)
                    requests.append(
                        {"op": "answer", "session": session_ordinal, "body": {"answer_index": answer_index}}
                    )
                state = dialog.select_conjunct(state, target)
                requests.append(
                    {"op": "conjunct", "session": session_ordinal, "body": {"conjunct_id": target}}
                )
            project.append_events(session_id, list(state.log))
            project.save_profile(session_id, state.profile())
            session_ids.append(session_id)
            session_ordinal += 1

    if emit_requests is not None:
        lines = [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in requests]
        Path(emit_requests).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    return {
        "inventory_id": inventory_id,
        "dialog_tree_id": tree_id,
        "documents_created": created_documents,
        "sessions": session_ids,
        "requests": len(requests),
    }


_REQUEST_PATHS = {
    "answer": "answer",
    "topic_comment": "topic-comment",
    "conjunct": "conjunct",
    "backtrack": "backtrack",
}


def replay_requests(client, requests: list[dict]) -> list[str]:
    """Send a recorded mutating-request sequence to a live server.

    ``client`` is anything with requests-style ``get``/``post`` returning
    responses with ``status_code`` and ``json()`` (an httpx client or a
    FastAPI TestClient). Stage tokens are fetched fresh before every post,
    as a real client would. Returns the created session ids in order.
    """
    session_ids: list[str] = []
    for request in requests:
        if request["op"] == "create_session":
            response = client.post("/sessions", json=request["body"])
            if response.status_code != 201:
                raise ProfilingError("replay-failed", f"create_session failed: {response.status_code} {response.text}")
            session_ids.append(response.json()["session_id"])
            continue
        session_id = session_ids[request["session"]]
        screen = client.get(f"/sessions/{session_id}/screen")
        if screen.status_code != 200:
            raise ProfilingError("replay-failed", f"screen fetch failed: {screen.status_code}")
        body = dict(request["body"], stage_token=screen.json()["stage_token"])
        path = _REQUEST_PATHS[request["op"]]
        response = client.post(f"/sessions/{session_id}/{path}", json=body)
        if response.status_code >= 300:
            raise ProfilingError(
                "replay-failed",
                f"{request['op']} on {session_id} failed: {response.status_code} {response.text}",
            )
    return session_ids


def load_recipe(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProfilingError("io-error", f"cannot read recipe {path}: {exc}") from exc
    except ValueError as exc:
        raise ProfilingError("validation-failed", f"recipe {path} is not valid JSON: {exc}") from exc
