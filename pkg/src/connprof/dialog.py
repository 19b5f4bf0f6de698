"""Guided-dialog state machine with an append-only, replayable event log.

One session walks an evaluator through every sentence pair of a document.
For each pair the evaluator (optionally) extracts topics and comments, then
answers guiding questions until a screen of at most 8 conjuncts is reached
and one conjunct is selected. Backtracking undoes the latest decision, either
within the current pair or by reopening the previously finalized pair.

Everything an evaluator does is appended to the session log. The log is the
source of truth: ``replay`` folds the same transition function over a stored
log and reproduces the live state exactly, which is what makes sessions
resumable after a crash or restart.

Sessions are single-writer: operations on one session must be serialized by
the caller (the HTTP service does this). All operations here are pure, they
return a new state and never mutate their input.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import ProfilingError
from .model import (
    ConjunctInventory,
    ConnectivityProfile,
    RelationChoice,
    TextDocument,
    TopicComment,
    Violation,
    assemble_profile,
    profile_slots,
)

MODE_LAZY = "lazy"
MODE_FULL = "full"

KIND_QUESTION = "question"
KIND_SCREEN = "conjunct_screen"

MAX_SCREEN_CONJUNCTS = 8
MAX_ANSWERS = 6
MIN_ANSWERS = 2

Clock = Callable[[], int]


def wall_clock_ms() -> int:
    return int(time.time() * 1000)


@dataclass(frozen=True)
class Answer:
    label: str
    target: str


@dataclass(frozen=True)
class DialogNode:
    """Either a question (2-6 answers) or a screen of at most 8 conjuncts."""

    id: str
    kind: str
    prompt: str = ""
    answers: tuple[Answer, ...] = ()
    conjuncts: tuple[str, ...] = ()


@dataclass(frozen=True)
class DialogTree:
    """Question/answer graph whose leaves are conjunct screens.

    Kept as "tree" in the API for familiarity, but answer targets may
    converge, so it is really a rooted DAG.
    """

    id: str
    root: str
    nodes: dict[str, DialogNode]
    inventory_id: str

    def node(self, node_id: str) -> DialogNode:
        return self.nodes[node_id]


@dataclass(frozen=True)
class SessionEvent:
    """One log record. ``seq`` is dense from 1; timestamps never decrease."""

    seq: int
    timestamp_ms: int
    kind: str
    payload: dict


EV_SESSION_STARTED = "session_started"
EV_PAIR_STARTED = "pair_started"
EV_TOPIC_COMMENT = "topic_comment_submitted"
EV_ANSWER_CHOSEN = "answer_chosen"
EV_BACKTRACKED = "backtracked"
EV_CONJUNCT_SELECTED = "conjunct_selected"
EV_PAIR_FINALIZED = "pair_finalized"
EV_SESSION_FINALIZED = "session_finalized"


@dataclass(frozen=True)
class SessionState:
    """Full state of one evaluation session.

    The document, tree, and inventory are carried as context references but
    excluded from equality: two states are equal when their logs and derived
    fields agree, which is exactly the replay-determinism contract.
    """

    session_id: str
    evaluator_id: str
    document_id: str
    dialog_tree_id: str
    mode: str
    current_pair: int | None
    dialog_path: tuple[str, ...]
    committed_choices: dict[int, RelationChoice]
    pending_topic_comment: TopicComment | None
    log: tuple[SessionEvent, ...]
    doc: TextDocument = field(compare=False, repr=False)
    tree: DialogTree = field(compare=False, repr=False)
    inv: ConjunctInventory = field(compare=False, repr=False)
    clock: Clock = field(compare=False, repr=False, default=wall_clock_ms)

    @property
    def total_pairs(self) -> int:
        return self.doc.sentence_count - 1

    @property
    def is_finalized(self) -> bool:
        return self.current_pair is None and len(self.committed_choices) == self.total_pairs

    @property
    def current_node(self) -> DialogNode | None:
        if not self.dialog_path:
            return None
        return self.tree.node(self.dialog_path[-1])

    def can_backtrack(self) -> bool:
        if self.current_pair is not None and len(self.dialog_path) >= 2:
            return True
        reopenable = self.total_pairs + 1 if self.current_pair is None else self.current_pair - 1
        return reopenable >= 2 and reopenable in self.committed_choices

    def profile(self) -> ConnectivityProfile:
        """The assembled profile; only available once the session finalized."""
        if not self.is_finalized:
            raise ProfilingError("session-not-finalized", f"session {self.session_id} is not finalized")
        return assemble_profile(
            self.doc, self.inv, list(self.committed_choices.values()), self.evaluator_id
        )


# ---------------------------------------------------------------------------
# Tree validation


def validate_tree(tree: DialogTree, inv: ConjunctInventory) -> list[Violation]:
    """Structural checks on a dialog tree bound to an inventory.

    Reports oversize screens and answer lists, dangling answer targets,
    unreachable nodes, cycles, and inventory conjuncts that appear on no
    reachable screen.
    """
    violations: list[Violation] = []
    inventory_conjuncts = set(inv.conjunct_order())

    if tree.inventory_id != inv.id:
        violations.append(
            Violation(
                "inventory-mismatch",
                f"tree {tree.id!r} is bound to inventory {tree.inventory_id!r}, got {inv.id!r}",
            )
        )

    for node in tree.nodes.values():
        if node.kind == KIND_QUESTION:
            if len(node.answers) > MAX_ANSWERS:
                violations.append(
                    Violation("answers-exceed-6", f"question {node.id!r} has {len(node.answers)} answers", node.id)
                )
            if len(node.answers) < MIN_ANSWERS:
                violations.append(
                    Violation("too-few-answers", f"question {node.id!r} has {len(node.answers)} answers", node.id)
                )
            for answer in node.answers:
                if answer.target not in tree.nodes:
                    violations.append(
                        Violation(
                            "dangling-target",
                            f"answer {answer.label!r} of {node.id!r} targets unknown node {answer.target!r}",
                            node.id,
                        )
                    )
        elif node.kind == KIND_SCREEN:
            if len(node.conjuncts) > MAX_SCREEN_CONJUNCTS:
                violations.append(
                    Violation(
                        "screen-exceeds-8",
                        f"screen {node.id!r} lists {len(node.conjuncts)} conjuncts (max {MAX_SCREEN_CONJUNCTS})",
                        node.id,
                    )
                )
            if not node.conjuncts:
                violations.append(Violation("empty-screen", f"screen {node.id!r} lists no conjuncts", node.id))
            for conjunct_id in node.conjuncts:
                if conjunct_id not in inventory_conjuncts:
                    violations.append(
                        Violation(
                            "unknown-conjunct",
                            f"screen {node.id!r} lists conjunct {conjunct_id!r} not in inventory",
                            node.id,
                        )
                    )
        else:
            violations.append(Violation("unknown-kind", f"node {node.id!r} has kind {node.kind!r}", node.id))

    if tree.root not in tree.nodes:
        violations.append(Violation("missing-root", f"root node {tree.root!r} does not exist"))
        return violations

    # Reachability and cycle detection by iterative DFS from the root.
    WHITE, GREY, BLACK = 0, 1, 2
    color = {node_id: WHITE for node_id in tree.nodes}
    stack: list[tuple[str, int]] = [(tree.root, 0)]
    color[tree.root] = GREY
    cycle_edges: list[tuple[str, str]] = []
    while stack:
        node_id, edge_index = stack[-1]
        node = tree.nodes[node_id]
        targets = [a.target for a in node.answers if a.target in tree.nodes]
        if edge_index < len(targets):
            stack[-1] = (node_id, edge_index + 1)
            target = targets[edge_index]
            if color[target] == GREY:
                cycle_edges.append((node_id, target))
            elif color[target] == WHITE:
                color[target] = GREY
                stack.append((target, 0))
        else:
            color[node_id] = BLACK
            stack.pop()

    for source, target in cycle_edges:
        violations.append(Violation("cycle", f"edge {source!r} -> {target!r} closes a cycle"))

    reachable = {node_id for node_id, c in color.items() if c != WHITE}
    for node_id in tree.nodes:
        if node_id not in reachable:
            violations.append(Violation("unreachable-node", f"node {node_id!r} is unreachable from the root", node_id))

    covered: set[str] = set()
    for node_id in reachable:
        node = tree.nodes[node_id]
        if node.kind == KIND_SCREEN:
            covered.update(node.conjuncts)
    for conjunct_id in inv.conjunct_order():
        if conjunct_id not in covered:
            violations.append(
                Violation(
                    "uncovered-conjunct",
                    f"conjunct {conjunct_id!r} appears on no reachable screen",
                    conjunct_id,
                )
            )

    return violations


# ---------------------------------------------------------------------------
# The transition core
#
# Live operations validate their preconditions with precise error codes,
# construct events, and push them through _apply. Replay pushes stored events
# through the same _apply, where any illegality means the log is corrupt.
# Keeping a single transition function is what makes replay exact.


def _corrupt(message: str) -> ProfilingError:
    return ProfilingError("corrupt-log", message)


def _check_event_header(state: SessionState, event: SessionEvent) -> None:
    expected_seq = state.log[-1].seq + 1 if state.log else 1
    if event.seq != expected_seq:
        raise _corrupt(f"event seq {event.seq} breaks dense order (expected {expected_seq})")
    if state.log and event.timestamp_ms < state.log[-1].timestamp_ms:
        raise _corrupt(f"event {event.seq} timestamp decreases")


def _apply(state: SessionState, event: SessionEvent) -> SessionState:
    _check_event_header(state, event)
    payload = event.payload
    kind = event.kind
    log = state.log + (event,)

    if kind == EV_PAIR_STARTED:
        pair = payload["pair_index"]
        if state.current_pair is None:
            if pair != 2 or state.committed_choices:
                raise _corrupt(f"pair_started({pair}) is not a legal session opening")
        elif pair != state.current_pair + 1 or state.current_pair not in state.committed_choices:
            raise _corrupt(f"pair_started({pair}) while pair {state.current_pair} is unfinished")
        return replace(
            state,
            current_pair=pair,
            dialog_path=(state.tree.root,),
            pending_topic_comment=None,
            log=log,
        )

    if kind == EV_TOPIC_COMMENT:
        if state.mode != MODE_FULL:
            raise _corrupt("topic_comment_submitted in a lazy-mode session")
        if payload["pair_index"] != state.current_pair:
            raise _corrupt(f"topic comment for pair {payload['pair_index']} while pair {state.current_pair} is active")
        if state.current_pair in state.committed_choices:
            raise _corrupt(f"topic comment for already committed pair {state.current_pair}")
        tc = TopicComment(
            pair_index=payload["pair_index"],
            topics=tuple(payload["topics"]),
            comments=tuple(payload["comments"]),
            intra_pair_conjuncts=tuple(payload.get("intra_pair_conjuncts", ())),
        )
        return replace(state, pending_topic_comment=tc, log=log)

    if kind == EV_ANSWER_CHOSEN:
        node = state.current_node
        if node is None or node.kind != KIND_QUESTION:
            raise _corrupt("answer_chosen outside a question node")
        if node.id != payload["node_id"]:
            raise _corrupt(f"answer_chosen at {payload['node_id']!r} but current node is {node.id!r}")
        index = payload["answer_index"]
        if not (0 <= index < len(node.answers)):
            raise _corrupt(f"answer index {index} out of range at {node.id!r}")
        if node.answers[index].target != payload["target"]:
            raise _corrupt(f"answer {index} at {node.id!r} targets {node.answers[index].target!r}")
        if state.mode == MODE_FULL and state.pending_topic_comment is None:
            raise _corrupt("answer_chosen before topic/comment in a full-mode session")
        return replace(state, dialog_path=state.dialog_path + (payload["target"],), log=log)

    if kind == EV_BACKTRACKED:
        undone = payload["undone"]
        if undone == "answer":
            if state.current_pair is None or len(state.dialog_path) < 2:
                raise _corrupt("backtracked(answer) with no dialog step to undo")
            if payload["from_node"] != state.dialog_path[-1] or payload["to_node"] != state.dialog_path[-2]:
                raise _corrupt("backtracked(answer) does not match the dialog path")
            return replace(state, dialog_path=state.dialog_path[:-1], log=log)
        if undone == "pair":
            pair = payload["pair_index"]
            if state.current_pair is not None and len(state.dialog_path) >= 2:
                raise _corrupt("backtracked(pair) while mid-dialog")
            expected = state.total_pairs + 1 if state.current_pair is None else state.current_pair - 1
            if pair != expected or pair not in state.committed_choices:
                raise _corrupt(f"backtracked(pair) cannot reopen pair {pair}")
            if state.committed_choices[pair].conjunct_id != payload["withdrawn_conjunct_id"]:
                raise _corrupt(f"backtracked(pair) withdraws a choice pair {pair} never made")
            committed = dict(state.committed_choices)
            del committed[pair]
            return replace(
                state,
                current_pair=pair,
                dialog_path=(state.tree.root,),
                committed_choices=committed,
                pending_topic_comment=None,
                log=log,
            )
        raise _corrupt(f"backtracked with unknown payload {undone!r}")

    if kind == EV_CONJUNCT_SELECTED:
        node = state.current_node
        if node is None or node.kind != KIND_SCREEN:
            raise _corrupt("conjunct_selected outside a conjunct screen")
        if payload["pair_index"] != state.current_pair or payload["node_id"] != node.id:
            raise _corrupt("conjunct_selected does not match the active pair/screen")
        conjunct_id = payload["conjunct_id"]
        if conjunct_id not in node.conjuncts:
            raise _corrupt(f"conjunct {conjunct_id!r} is not on screen {node.id!r}")
        if state.inv.category_of(conjunct_id) != payload["category_id"]:
            raise _corrupt(f"conjunct {conjunct_id!r} category does not match the inventory")
        if state.mode == MODE_FULL and state.pending_topic_comment is None:
            raise _corrupt("conjunct_selected before topic/comment in a full-mode session")
        committed = dict(state.committed_choices)
        committed[state.current_pair] = RelationChoice(
            state.current_pair, conjunct_id, payload["category_id"]
        )
        return replace(state, committed_choices=committed, log=log)

    if kind == EV_PAIR_FINALIZED:
        pair = payload["pair_index"]
        choice = state.committed_choices.get(pair)
        if pair != state.current_pair or choice is None:
            raise _corrupt(f"pair_finalized({pair}) without a committed choice")
        if choice.conjunct_id != payload["conjunct_id"]:
            raise _corrupt(f"pair_finalized({pair}) does not match the committed conjunct")
        return replace(state, pending_topic_comment=None, log=log)

    if kind == EV_SESSION_FINALIZED:
        if state.current_pair is None:
            raise _corrupt("session_finalized on an already finalized session")
        if set(state.committed_choices) != set(range(2, state.total_pairs + 2)):
            raise _corrupt("session_finalized before all pairs were committed")
        return replace(state, current_pair=None, dialog_path=(), log=log)

    raise _corrupt(f"unknown event kind {kind!r}")


def _initial_state(
    event: SessionEvent,
    doc: TextDocument,
    tree: DialogTree,
    inv: ConjunctInventory,
    clock: Clock,
) -> SessionState:
    if event.seq != 1 or event.kind != EV_SESSION_STARTED:
        raise _corrupt("log must open with session_started at seq 1")
    payload = event.payload
    if payload["document_id"] != doc.id:
        raise _corrupt(f"log is for document {payload['document_id']!r}, got {doc.id!r}")
    if payload["dialog_tree_id"] != tree.id:
        raise _corrupt(f"log is for tree {payload['dialog_tree_id']!r}, got {tree.id!r}")
    if payload["mode"] not in (MODE_LAZY, MODE_FULL):
        raise _corrupt(f"unknown session mode {payload['mode']!r}")
    return SessionState(
        session_id=payload["session_id"],
        evaluator_id=payload["evaluator_id"],
        document_id=doc.id,
        dialog_tree_id=tree.id,
        mode=payload["mode"],
        current_pair=None,
        dialog_path=(),
        committed_choices={},
        pending_topic_comment=None,
        log=(event,),
        doc=doc,
        tree=tree,
        inv=inv,
        clock=clock,
    )


def _emit(state: SessionState, kind: str, payload: dict) -> SessionState:
    seq = state.log[-1].seq + 1 if state.log else 1
    timestamp = state.clock()
    if state.log:
        timestamp = max(timestamp, state.log[-1].timestamp_ms)
    return _apply(state, SessionEvent(seq, timestamp, kind, payload))


# ---------------------------------------------------------------------------
# Operations


def start_session(
    doc: TextDocument,
    tree: DialogTree,
    inv: ConjunctInventory,
    evaluator_id: str,
    mode: str,
    session_id: str | None = None,
    clock: Clock = wall_clock_ms,
) -> SessionState:
    """Open a session on pair 2 with the dialog at the root node.

    The tree is validated against the inventory up front so mid-session
    operations can trust node references unconditionally.
    """
    if mode not in (MODE_LAZY, MODE_FULL):
        raise ProfilingError("invalid-config", f"unknown mode {mode!r} (use 'lazy' or 'full')")
    profile_slots(doc)  # raises document-too-short
    violations = validate_tree(tree, inv)
    if violations:
        summary = "; ".join(str(v) for v in violations[:3])
        raise ProfilingError("invalid-tree", f"dialog tree {tree.id!r} is invalid: {summary}")

    if session_id is None:
        session_id = uuid.uuid4().hex[:12]
    opening = SessionEvent(
        seq=1,
        timestamp_ms=clock(),
        kind=EV_SESSION_STARTED,
        payload={
            "session_id": session_id,
            "evaluator_id": evaluator_id,
            "document_id": doc.id,
            "dialog_tree_id": tree.id,
            "mode": mode,
        },
    )
    state = _initial_state(opening, doc, tree, inv, clock)
    return _emit(state, EV_PAIR_STARTED, {"pair_index": 2})


def submit_topic_comment(state: SessionState, tc: TopicComment) -> SessionState:
    """Record topic/comment extraction for the current pair (full mode)."""
    if state.mode != MODE_FULL:
        raise ProfilingError("wrong-mode", "topic/comment extraction is only part of full-mode sessions")
    if state.current_pair is None or tc.pair_index in state.committed_choices:
        raise ProfilingError("pair-already-finalized", f"pair {tc.pair_index} already has a committed conjunct")
    if tc.pair_index != state.current_pair:
        raise ProfilingError(
            "wrong-pair", f"topic/comment is for pair {tc.pair_index}, current pair is {state.current_pair}"
        )
    if not tc.topics or not any(t.strip() for t in tc.topics):
        raise ProfilingError("invalid-topic-comment", "at least one nonempty topic is required")
    if not tc.comments or not any(c.strip() for c in tc.comments):
        raise ProfilingError("invalid-topic-comment", "at least one nonempty comment is required")
    for conjunct_id in tc.intra_pair_conjuncts:
        state.inv.conjunct_by_id(conjunct_id)  # raises unknown-conjunct
    return _emit(
        state,
        EV_TOPIC_COMMENT,
        {
            "pair_index": tc.pair_index,
            "topics": list(tc.topics),
            "comments": list(tc.comments),
            "intra_pair_conjuncts": list(tc.intra_pair_conjuncts),
        },
    )


def choose_answer(state: SessionState, answer_index: int) -> SessionState:
    """Follow answer ``answer_index`` (0-based) of the current question."""
    node = state.current_node
    if node is None or node.kind != KIND_QUESTION:
        where = "a finalized session" if state.current_pair is None else f"node {node.id!r}"
        raise ProfilingError("not-a-question", f"cannot answer at {where}")
    if not (0 <= answer_index < len(node.answers)):
        raise ProfilingError(
            "index-out-of-range",
            f"answer index {answer_index} out of range for {len(node.answers)} answers",
        )
    if state.mode == MODE_FULL and state.pending_topic_comment is None:
        raise ProfilingError("topic-comment-required", "extract topic and comment before the dialog")
    return _emit(
        state,
        EV_ANSWER_CHOSEN,
        {"node_id": node.id, "answer_index": answer_index, "target": node.answers[answer_index].target},
    )


def backtrack(state: SessionState) -> SessionState:
    """Undo the most recent decision.

    Mid-dialog this pops one node off the path; at the root of a pair (or on
    a finalized session) it reopens the previously finalized pair and
    withdraws its committed choice. The withdrawn decision stays in the log.
    """
    if state.current_pair is not None and len(state.dialog_path) >= 2:
        return _emit(
            state,
            EV_BACKTRACKED,
            {"undone": "answer", "from_node": state.dialog_path[-1], "to_node": state.dialog_path[-2]},
        )
    reopen = state.total_pairs + 1 if state.current_pair is None else state.current_pair - 1
    if reopen < 2 or reopen not in state.committed_choices:
        raise ProfilingError("nothing-to-backtrack", "at the start of the first pair with no history")
    return _emit(
        state,
        EV_BACKTRACKED,
        {
            "undone": "pair",
            "pair_index": reopen,
            "withdrawn_conjunct_id": state.committed_choices[reopen].conjunct_id,
        },
    )


def select_conjunct(state: SessionState, conjunct_id: str) -> SessionState:
    """Commit ``conjunct_id`` for the current pair and advance.

    Selecting on the last pair finalizes the session; otherwise the next pair
    opens with the dialog back at the root.
    """
    node = state.current_node
    if node is None or node.kind != KIND_SCREEN:
        where = "a finalized session" if state.current_pair is None else f"node {node.id!r}"
        raise ProfilingError("not-a-screen", f"cannot select a conjunct at {where}")
    if conjunct_id not in node.conjuncts:
        raise ProfilingError("conjunct-not-on-screen", f"conjunct {conjunct_id!r} is not on screen {node.id!r}")
    if state.mode == MODE_FULL and state.pending_topic_comment is None:
        raise ProfilingError("topic-comment-required", "extract topic and comment before choosing a conjunct")

    pair = state.current_pair
    category_id = state.inv.category_of(conjunct_id)
    state = _emit(
        state,
        EV_CONJUNCT_SELECTED,
        {"pair_index": pair, "node_id": node.id, "conjunct_id": conjunct_id, "category_id": category_id},
    )
    state = _emit(
        state,
        EV_PAIR_FINALIZED,
        {"pair_index": pair, "conjunct_id": conjunct_id, "category_id": category_id},
    )
    if pair < state.total_pairs + 1:
        return _emit(state, EV_PAIR_STARTED, {"pair_index": pair + 1})
    return _emit(state, EV_SESSION_FINALIZED, {"pair_count": state.total_pairs})


def replay(
    log: list[SessionEvent] | tuple[SessionEvent, ...],
    doc: TextDocument,
    tree: DialogTree,
    inv: ConjunctInventory,
    clock: Clock = wall_clock_ms,
) -> SessionState:
    """Reconstruct the exact session state from a stored log.

    Any prefix of a valid log is itself valid (a crash may truncate the tail
    of a multi-event operation), so the reconstructed state is always
    resumable with the ordinary operations.
    """
    if not log:
        raise _corrupt("log is empty")
    state = _initial_state(log[0], doc, tree, inv, clock)
    for event in log[1:]:
        if event.kind == EV_SESSION_STARTED:
            raise _corrupt(f"second session_started at seq {event.seq}")
        state = _apply(state, event)
    return state


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class SessionMetrics:
    """Timing and backtrack counts derived from a session log."""

    total_ms: int
    per_pair_ms: dict[int, int]
    backtrack_count: int


def metrics_from_events(events: list[SessionEvent] | tuple[SessionEvent, ...]) -> SessionMetrics:
    """Compute metrics from raw events; no tree or document context needed.

    The interval between two consecutive events is attributed to the pair
    that was active when it elapsed, so time spent on a reopened pair counts
    toward that pair.
    """
    if not events:
        return SessionMetrics(0, {}, 0)
    per_pair: dict[int, int] = {}
    backtracks = 0
    active: int | None = None
    previous_ts = events[0].timestamp_ms
    for event in events:
        if active is not None:
            per_pair[active] = per_pair.get(active, 0) + (event.timestamp_ms - previous_ts)
        previous_ts = event.timestamp_ms
        if event.kind == EV_PAIR_STARTED:
            active = event.payload["pair_index"]
        elif event.kind == EV_BACKTRACKED:
            backtracks += 1
            if event.payload["undone"] == "pair":
                active = event.payload["pair_index"]
        elif event.kind == EV_SESSION_FINALIZED:
            active = None
    total = events[-1].timestamp_ms - events[0].timestamp_ms
    return SessionMetrics(total_ms=total, per_pair_ms=per_pair, backtrack_count=backtracks)


def session_metrics(state: SessionState) -> SessionMetrics:
    return metrics_from_events(state.log)


# ---------------------------------------------------------------------------
# Wire formats (JSON)


def event_to_json(event: SessionEvent) -> dict:
    return {
        "seq": event.seq,
        "timestamp_ms": event.timestamp_ms,
        "kind": event.kind,
        "payload": event.payload,
    }


def event_from_json(obj: dict) -> SessionEvent:
    try:
        return SessionEvent(
            seq=obj["seq"],
            timestamp_ms=obj["timestamp_ms"],
            kind=obj["kind"],
            payload=obj["payload"],
        )
    except (KeyError, TypeError) as exc:
        raise ProfilingError("corrupt-log", f"malformed event record: {exc}") from exc


def dialog_tree_from_json(obj: dict) -> DialogTree:
    """Parse the dialog tree file format (permissive; use validate_tree)."""
    try:
        nodes: dict[str, DialogNode] = {}
        for node_id, spec in obj["nodes"].items():
            if spec["kind"] == KIND_QUESTION:
                answers = tuple(Answer(a["label"], a["target"]) for a in spec["answers"])
                nodes[node_id] = DialogNode(id=node_id, kind=KIND_QUESTION, prompt=spec["prompt"], answers=answers)
            else:
                nodes[node_id] = DialogNode(
                    id=node_id, kind=spec["kind"], conjuncts=tuple(spec.get("conjuncts", ()))
                )
        return DialogTree(id=obj["id"], root=obj["root"], nodes=nodes, inventory_id=obj["inventory_id"])
    except (KeyError, TypeError) as exc:
        raise ProfilingError("validation-failed", f"malformed dialog tree: {exc}") from exc


def dialog_tree_to_json(tree: DialogTree) -> dict:
    nodes: dict[str, dict] = {}
    for node_id, node in tree.nodes.items():
        if node.kind == KIND_QUESTION:
            nodes[node_id] = {
                "kind": KIND_QUESTION,
                "prompt": node.prompt,
                "answers": [{"label": a.label, "target": a.target} for a in node.answers],
            }
        else:
            nodes[node_id] = {"kind": node.kind, "conjuncts": list(node.conjuncts)}
    return {"id": tree.id, "inventory_id": tree.inventory_id, "root": tree.root, "nodes": nodes}
