from __future__ import annotations

import random

import pytest

from connprof import (
    ConnectivityProfile,
    RelationChoice,
    Sentence,
    TextDocument,
    backtrack,
    choose_answer,
    select_conjunct,
    start_session,
    submit_topic_comment,
)
from connprof.defaults import default_dialog_tree, default_inventory
from connprof.dialog import MODE_FULL, SessionState
from connprof.model import TopicComment
from connprof.synth import StepClock, shortest_path_to_conjunct


@pytest.fixture(scope="session")
def inv():
    return default_inventory()


@pytest.fixture(scope="session")
def tree():
    return default_dialog_tree()


def make_doc(doc_id: str, n: int, language: str = "en", group: str | None = None) -> TextDocument:
    sentences = tuple(Sentence(i, f"Sentence {i} of {doc_id}.", language) for i in range(1, n + 1))
    return TextDocument(doc_id, language, sentences, alignment_group=group)


def make_profile(doc_id: str, evaluator_id: str, labels: list[tuple[str, str]]) -> ConnectivityProfile:
    """labels: (conjunct_id, category_id) per pair starting at pair 2."""
    choices = tuple(
        RelationChoice(i + 2, conjunct_id, category_id)
        for i, (conjunct_id, category_id) in enumerate(labels)
    )
    return ConnectivityProfile(doc_id, evaluator_id, choices)


def complete_session(doc, tree, inv, conjunct_ids, mode="lazy", session_id="s", step_ms=0):
    """Drive a session straight through, one target conjunct per pair."""
    state = start_session(doc, tree, inv, "ev", mode, session_id=session_id, clock=StepClock(0, step_ms))
    for offset, conjunct_id in enumerate(conjunct_ids):
        if mode == MODE_FULL:
            tc = TopicComment(offset + 2, ("a topic",), ("a comment",))
            state = submit_topic_comment(state, tc)
        for answer_index in shortest_path_to_conjunct(tree, conjunct_id):
            state = choose_answer(state, answer_index)
        state = select_conjunct(state, conjunct_id)
    return state


def random_walk(doc, tree, inv, rng: random.Random, mode: str, max_ops: int) -> list[SessionState]:
    """Random valid operation sequence; returns live states at op boundaries.

    Backtracks (both kinds), topic/comment submissions, answers, and
    selections all occur; the walk stops at max_ops or when the session
    finalizes and the dice say stop.
    """
    clock = StepClock(0, rng.choice([0, 17, 1000]))
    state = start_session(
        doc, tree, inv, f"ev-{rng.randrange(999)}", mode, session_id="walk", clock=clock
    )
    states = [state]
    for _ in range(max_ops):
        if state.current_pair is None:
            if rng.random() < 0.5:
                break
            state = backtrack(state)  # reopen the last pair
        elif mode == MODE_FULL and state.pending_topic_comment is None:
            tc = TopicComment(
                state.current_pair,
                (f"topic {rng.randrange(10)}",),
                (f"comment {rng.randrange(10)}",),
                intra_pair_conjuncts=tuple(rng.sample(inv.conjunct_order(), k=rng.randrange(2))),
            )
            state = submit_topic_comment(state, tc)
        elif state.can_backtrack() and rng.random() < 0.2:
            state = backtrack(state)
        else:
            node = state.current_node
            if node.kind == "question":
                state = choose_answer(state, rng.randrange(len(node.answers)))
            else:
                state = select_conjunct(state, rng.choice(node.conjuncts))
        states.append(state)
    return states
