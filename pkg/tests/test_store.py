from __future__ import annotations

import json
import random

import pytest

from connprof import ProfilingError, replay
from connprof.defaults import default_dialog_json, default_inventory_json
from connprof.dialog import MODE_LAZY, SessionEvent
from connprof.model import document_to_json
from connprof.store import (
    KIND_DIALOG_TREE,
    KIND_DOCUMENT,
    KIND_INVENTORY,
    Project,
    event_line,
)

from conftest import complete_session, make_doc, random_walk


@pytest.fixture
def project(tmp_path):
    return Project(tmp_path / "proj", create=True)


def install_defaults(project):
    project.put_artifact(KIND_INVENTORY, default_inventory_json())
    project.put_artifact(KIND_DIALOG_TREE, default_dialog_json())


class TestArtifacts:
    def test_round_trip_is_byte_equivalent(self, project):
        install_defaults(project)
        doc = make_doc("doc-1", 3, group="g")
        project.put_artifact(KIND_DOCUMENT, document_to_json(doc))

        reopened = Project(project.root)
        assert reopened.get_document("doc-1") == doc
        original = (project.root / "documents" / "doc-1.json").read_bytes()
        assert json.loads(original) == document_to_json(doc)

    def test_duplicate_id_rejected(self, project):
        install_defaults(project)
        with pytest.raises(ProfilingError) as err:
            project.put_artifact(KIND_INVENTORY, default_inventory_json())
        assert err.value.code == "duplicate-id"

    def test_validation_failure_writes_nothing(self, project):
        bad = default_inventory_json()
        bad["conjuncts"][0]["category_id"] = "cat-nowhere"
        with pytest.raises(ProfilingError) as err:
            project.put_artifact(KIND_INVENTORY, bad)
        assert err.value.code == "validation-failed"
        assert list((project.root / "inventories").glob("*.json")) == []

    def test_tree_requires_stored_inventory(self, project):
        with pytest.raises(ProfilingError) as err:
            project.put_artifact(KIND_DIALOG_TREE, default_dialog_json())
        assert err.value.code == "validation-failed"

    def test_short_document_rejected(self, project):
        doc = {"id": "tiny", "language": "en", "sentences": ["only one."]}
        with pytest.raises(ProfilingError) as err:
            project.put_artifact(KIND_DOCUMENT, doc)
        assert err.value.code == "validation-failed"

    def test_unknown_artifact(self, project):
        with pytest.raises(ProfilingError) as err:
            project.get_document("missing")
        assert err.value.code == "not-found"


class TestAppendEvents:
    def test_fresh_session_starts_at_one(self, project):
        project.append_event("s1", SessionEvent(1, 0, "session_started", {"x": 1}))
        assert project.read_session_events("s1")[0].seq == 1

    def test_seq_conflict(self, project):
        project.append_event("s1", SessionEvent(1, 0, "session_started", {}))
        with pytest.raises(ProfilingError) as err:
            project.append_event("s1", SessionEvent(3, 0, "pair_started", {}))
        assert err.value.code == "seq-conflict"

    def test_rejected_append_leaves_file_untouched(self, project):
        project.append_event("s1", SessionEvent(1, 0, "session_started", {}))
        path = project.root / "sessions" / "s1.jsonl"
        before = path.read_bytes()
        with pytest.raises(ProfilingError):
            project.append_event("s1", SessionEvent(1, 0, "session_started", {}))
        assert path.read_bytes() == before

    def test_partial_final_line_truncated_on_open(self, tmp_path, tree, inv):
        root = tmp_path / "proj"
        project = Project(root, create=True)
        state = complete_session(make_doc("d", 3), tree, inv, ["also", "so"], session_id="s1")
        project.append_events("s1", list(state.log))
        project.close()

        path = root / "sessions" / "s1.jsonl"
        whole = path.read_bytes()
        # crash while writing one more event: half a line, no newline
        partial = event_line(SessionEvent(len(state.log) + 1, 99, "backtracked", {"undone": "answer"}))
        path.write_bytes(whole + partial[: len(partial) // 2].encode())

        reopened = Project(root)
        events = reopened.read_session_events("s1")
        assert [e.seq for e in events] == list(range(1, len(state.log) + 1))
        assert reopened.session_recovery("s1").recovered
        assert path.read_bytes() == whole  # tail gone from disk too

    def test_interior_corruption_is_fatal(self, tmp_path):
        root = tmp_path / "proj"
        project = Project(root, create=True)
        project.append_events(
            "s1",
            [
                SessionEvent(1, 0, "session_started", {}),
                SessionEvent(2, 0, "pair_started", {"pair_index": 2}),
            ],
        )
        project.close()
        path = root / "sessions" / "s1.jsonl"
        lines = path.read_text().splitlines()
        lines[0] = lines[0][:10]  # mangle a non-final line
        path.write_text("\n".join(lines) + "\n")
        reopened = Project(root)
        with pytest.raises(ProfilingError) as err:
            reopened.read_session_events("s1")
        assert err.value.code == "corrupt-log"


class TestLoadSession:
    def _store_session(self, tmp_path, tree, inv, state):
        project = Project(tmp_path / "proj", create=True)
        install_defaults(project)
        project.put_artifact(KIND_DOCUMENT, document_to_json(state.doc))
        project.append_events(state.session_id, list(state.log))
        return project

    def test_completed_session(self, tmp_path, tree, inv):
        state = complete_session(make_doc("d", 3), tree, inv, ["also", "so"], session_id="done-1")
        project = self._store_session(tmp_path, tree, inv, state)
        loaded = project.load_session("done-1")
        assert loaded == state
        assert loaded.profile() == state.profile()

    def test_mid_session_resumable(self, tmp_path, tree, inv):
        doc = make_doc("d", 4)
        states = random_walk(doc, tree, inv, random.Random(1), MODE_LAZY, max_ops=5)
        state = states[-1]
        project = self._store_session(tmp_path, tree, inv, state)
        loaded = project.load_session(state.session_id)
        assert loaded == state
        assert loaded.committed_choices == state.committed_choices

    def test_unknown_session(self, project):
        with pytest.raises(ProfilingError) as err:
            project.load_session("ghost")
        assert err.value.code == "not-found"

    def test_crash_truncation_then_resume_to_completion(self, tmp_path, tree, inv):
        doc = make_doc("d", 3)
        state = complete_session(doc, tree, inv, ["also", "so"], session_id="s1")
        project = self._store_session(tmp_path, tree, inv, state)
        project.close()
        # chop bytes off the final line: the session_finalized record is lost
        path = project.root / "sessions" / "s1.jsonl"
        raw = path.read_bytes()
        path.write_bytes(raw[:-5])

        reopened = Project(project.root)
        loaded = reopened.load_session("s1")
        assert not loaded.is_finalized
        rebuilt = replay(loaded.log, state.doc, tree, inv)
        assert rebuilt == loaded
