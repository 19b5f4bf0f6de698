"""HTTP API for running evaluation sessions and pulling reports.

The wire contract is deliberately dumb: every mutating request carries the
``stage_token`` echoed from the screen it was rendered against, and requests
for one session are processed strictly one at a time. A stale token (double
click, lost race, outdated tab) gets a ``stale-request`` error and the client
refetches the screen. Evaluators never see category identifiers; screens only
ever carry conjuncts and their display forms.

Sessions survive restarts: an unknown session id is resolved by replaying its
stored log before the request proceeds.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from pathlib import Path

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import dialog
from .dialog import SessionState, metrics_from_events
from .errors import ProfilingError
from .model import ConjunctInventory, TopicComment, check_alignment, profile_to_json
from .reports import report_to_json
from .stats import (
    GRANULARITIES,
    WEIGHTING_PER_PAIR,
    pooled_report,
    text_report,
)
from .store import Project

_STATUS_BY_CODE = {
    "not-found": 404,
    "unknown-artifact": 404,
    "validation-failed": 400,
    "invalid-config": 400,
    "invalid-tree": 400,
    "document-too-short": 400,
    "misaligned-documents": 400,
    "no-profiles": 404,
    "stale-request": 409,
    "seq-conflict": 409,
    "corrupt-log": 500,
    "io-error": 500,
}
_DEFAULT_STATUS = 409  # state-machine preconditions: wrong-mode, not-a-question, ...


class CreateSessionBody(BaseModel):
    document_id: str
    dialog_tree_id: str
    evaluator_id: str
    mode: str = dialog.MODE_LAZY


class AnswerBody(BaseModel):
    answer_index: int
    stage_token: str


class TopicCommentBody(BaseModel):
    topics: list[str]
    comments: list[str]
    intra_pair_conjuncts: list[str] = []
    pair_index: int | None = None
    stage_token: str


class ConjunctBody(BaseModel):
    conjunct_id: str
    stage_token: str


class BacktrackBody(BaseModel):
    stage_token: str


def stage_token(state: SessionState) -> str:
    # One token per log position; any mutation invalidates outstanding screens.
    return f"t{len(state.log)}"


def screen_view(state: SessionState) -> dict:
    """Project the session state onto what the evaluator may see.

    Category ids and labels never appear here; the hiding of categories from
    evaluators is part of the method, not a cosmetic choice.
    """
    view: dict = {
        "session_id": state.session_id,
        "stage_token": stage_token(state),
        "mode": state.mode,
        "language": state.doc.language,
        "can_backtrack": state.can_backtrack(),
        "progress": {"completed": len(state.committed_choices), "total": state.total_pairs},
    }
    if state.current_pair is None:
        view["stage"] = "done"
        summary = []
        for choice in state.profile().choices:
            conjunct = state.inv.conjunct_by_id(choice.conjunct_id)
            summary.append(
                {
                    "pair_index": choice.pair_index,
                    "conjunct_id": choice.conjunct_id,
                    "surface": conjunct.surface_forms.get(state.doc.language, choice.conjunct_id),
                }
            )
        view["profile_summary"] = summary
        return view

    pair = state.current_pair
    view["pair_index"] = pair
    view["sentence_prev"] = state.doc.sentence(pair - 1).surface
    view["sentence_curr"] = state.doc.sentence(pair).surface

    if state.mode == dialog.MODE_FULL and state.pending_topic_comment is None:
        view["stage"] = "topic_comment"
        return view

    node = state.current_node
    if node.kind == dialog.KIND_QUESTION:
        view["stage"] = "question"
        view["prompt"] = node.prompt
        view["answers"] = [a.label for a in node.answers]
    else:
        view["stage"] = "conjunct_screen"
        conjuncts = []
        for conjunct_id in node.conjuncts:
            conjunct = state.inv.conjunct_by_id(conjunct_id)
            conjuncts.append(
                {
                    "conjunct_id": conjunct_id,
                    "surface": conjunct.surface_forms.get(state.doc.language, conjunct_id),
                    "surface_forms": dict(conjunct.surface_forms),
                }
            )
        view["conjuncts"] = conjuncts
    return view


class SessionRegistry:
    """In-memory session states over a Project, with per-session locks."""

    def __init__(self, project: Project):
        self.project = project
        self.states: dict[str, SessionState] = {}
        self.locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._id_lock = threading.Lock()
        self._counter = self._highest_existing()

    def _highest_existing(self) -> int:
        highest = 0
        for session_id in self.project.session_ids():
            if session_id.startswith("sess-"):
                try:
                    highest = max(highest, int(session_id.split("-", 1)[1]))
                except ValueError:
                    pass
        return highest

    def new_session_id(self) -> str:
        # Deterministic naming: replaying the same request sequence against a
        # fresh server reproduces the same ids, hence the same profile files.
        with self._id_lock:
            self._counter += 1
            return f"sess-{self._counter:04d}"

    def get(self, session_id: str) -> SessionState:
        state = self.states.get(session_id)
        if state is None:
            state = self.project.load_session(session_id)  # not-found if unknown
            self.states[session_id] = state
        return state

    def commit(self, old: SessionState, new: SessionState) -> None:
        fresh = new.log[len(old.log):]
        self.project.append_events(new.session_id, list(fresh))
        self.states[new.session_id] = new
        if new.is_finalized:
            self.project.save_profile(new.session_id, new.profile())


def create_app(project: Project | str | Path) -> FastAPI:
    if not isinstance(project, Project):
        project = Project(project)
    app = FastAPI(title="connprof", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    registry = SessionRegistry(project)
    app.state.registry = registry

    @app.exception_handler(ProfilingError)
    async def profiling_error_handler(_request, exc: ProfilingError):
        status = _STATUS_BY_CODE.get(exc.code, _DEFAULT_STATUS)
        return JSONResponse(status_code=status, content={"error_code": exc.code, "message": exc.message})

    def mutate(session_id: str, token: str, op):
        with registry.locks[session_id]:
            state = registry.get(session_id)
            if token != stage_token(state):
                raise ProfilingError("stale-request", "the screen this request was made from is outdated")
            new_state = op(state)
            registry.commit(state, new_state)
            return screen_view(new_state)

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        try:
            doc = project.get_document(body.document_id)
            tree = project.get_dialog_tree(body.dialog_tree_id)
            inv = project.get_inventory(tree.inventory_id)
        except ProfilingError as exc:
            if exc.code == "not-found":
                raise ProfilingError("unknown-artifact", exc.message) from exc
            raise
        session_id = registry.new_session_id()
        with registry.locks[session_id]:
            state = dialog.start_session(
                doc, tree, inv, body.evaluator_id, body.mode, session_id=session_id
            )
            project.append_events(session_id, list(state.log))
            registry.states[session_id] = state
        return {"session_id": session_id, "screen": screen_view(state)}

    @app.get("/sessions/{session_id}/screen")
    def get_screen(session_id: str):
        with registry.locks[session_id]:
            return screen_view(registry.get(session_id))

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, body: AnswerBody):
        return mutate(session_id, body.stage_token, lambda s: dialog.choose_answer(s, body.answer_index))

    @app.post("/sessions/{session_id}/topic-comment")
    def post_topic_comment(session_id: str, body: TopicCommentBody):
        def op(state: SessionState) -> SessionState:
            pair = body.pair_index if body.pair_index is not None else state.current_pair or 0
            tc = TopicComment(
                pair_index=pair,
                topics=tuple(body.topics),
                comments=tuple(body.comments),
                intra_pair_conjuncts=tuple(body.intra_pair_conjuncts),
            )
            return dialog.submit_topic_comment(state, tc)

        return mutate(session_id, body.stage_token, op)

    @app.post("/sessions/{session_id}/conjunct")
    def post_conjunct(session_id: str, body: ConjunctBody):
        return mutate(session_id, body.stage_token, lambda s: dialog.select_conjunct(s, body.conjunct_id))

    @app.post("/sessions/{session_id}/backtrack")
    def post_backtrack(session_id: str, body: BacktrackBody):
        return mutate(session_id, body.stage_token, dialog.backtrack)

    @app.get("/sessions/{session_id}/profile")
    def get_profile(session_id: str):
        with registry.locks[session_id]:
            state = registry.get(session_id)
            return profile_to_json(state.profile())

    @app.get("/reports")
    def get_reports(
        docs: str = "",
        granularity: str = "category",
        pooled: bool = False,
        pair_weighting: str = WEIGHTING_PER_PAIR,
    ):
        if granularity not in GRANULARITIES:
            raise ProfilingError("invalid-config", f"unknown granularity {granularity!r}")
        document_ids = [d for d in docs.split(",") if d] or _documents_with_profiles(project)
        reports = []
        groups = []
        for document_id in document_ids:
            rows = project.profiles_by_document(document_id)
            if not rows:
                raise ProfilingError("no-profiles", f"no profiles stored for document {document_id!r}")
            profiles = [profile for _, profile in rows]
            metrics = _metrics_for(project, [sid for sid, _ in rows])
            inv = _inventory_for(project, document_id)
            reports.append(report_to_json(text_report(profiles, metrics, inv, pair_weighting), granularity))
            groups.append((document_id, profiles))

        payload: dict = {"granularity": granularity, "pooled": pooled, "reports": reports}
        if pooled and groups:
            _require_aligned(project, document_ids)
            inv = _inventory_for(project, document_ids[0])
            payload["pooled_report"] = report_to_json(pooled_report(groups, inv, pair_weighting), granularity)
        return payload

    return app


def _documents_with_profiles(project: Project) -> list[str]:
    seen: list[str] = []
    for session_id in project.profile_session_ids():
        document_id = project.load_profile(session_id).document_id
        if document_id not in seen:
            seen.append(document_id)
    return seen


def _metrics_for(project: Project, session_ids: list[str]):
    metrics = []
    for session_id in session_ids:
        try:
            metrics.append(metrics_from_events(project.read_session_events(session_id)))
        except ProfilingError:
            continue  # profile without a readable log: skip its timing
    return metrics


def _inventory_for(project: Project, document_id: str) -> ConjunctInventory:
    """The inventory used for a document's sessions, else any stored one."""
    for session_id in project.profile_session_ids():
        if project.load_profile(session_id).document_id != document_id:
            continue
        try:
            events = project.read_session_events(session_id)
            tree = project.get_dialog_tree(events[0].payload["dialog_tree_id"])
            return project.get_inventory(tree.inventory_id)
        except (ProfilingError, KeyError, IndexError):
            continue
    ids = project.list_ids("inventory")
    if not ids:
        raise ProfilingError("not-found", "project has no inventory to rank labels with")
    return project.get_inventory(ids[0])


def _require_aligned(project: Project, document_ids: list[str]) -> None:
    docs = [project.get_document(document_id) for document_id in document_ids]
    for i, a in enumerate(docs):
        for b in docs[i + 1:]:
            report = check_alignment(a, b)
            if not report.aligned:
                raise ProfilingError("misaligned-documents", "; ".join(report.reasons))
