"""Durable project storage.

A project is a plain directory: one JSON file per document, inventory,
dialog tree, and profile, plus one JSON-lines file per session log. Logs are
meant to be read by humans as much as by the replay machinery, so nothing is
packed or compressed.

Writes of whole artifacts are atomic (write to a temp file, fsync, rename).
Session logs are append-only with the line as the atomicity unit: a crash can
leave at most one partial final line, which is detected and truncated the
next time the log is opened.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from .dialog import (
    DialogTree,
    SessionEvent,
    SessionState,
    dialog_tree_from_json,
    dialog_tree_to_json,
    event_from_json,
    event_to_json,
    replay,
    validate_tree,
)
from .errors import ProfilingError
from .model import (
    ConjunctInventory,
    ConnectivityProfile,
    TextDocument,
    document_from_json,
    document_to_json,
    inventory_from_json,
    inventory_to_json,
    is_valid_id,
    profile_from_json,
    profile_to_json,
    validate_document,
    validate_inventory,
)

KIND_DOCUMENT = "document"
KIND_INVENTORY = "inventory"
KIND_DIALOG_TREE = "dialog_tree"

_KIND_DIRS = {
    KIND_DOCUMENT: "documents",
    KIND_INVENTORY: "inventories",
    KIND_DIALOG_TREE: "dialogs",
}

_SUBDIRS = ("documents", "inventories", "dialogs", "sessions", "profiles")


def canonical_json(obj: dict) -> str:
    """The one serialization used for every stored artifact.

    Canonical form matters: synthesized corpora and server-written profiles
    must be byte-identical when they carry the same data.
    """
    return json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def event_line(event: SessionEvent) -> str:
    return json.dumps(event_to_json(event), ensure_ascii=False, separators=(",", ":"), sort_keys=True) + "\n"


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


@dataclass
class TailRecovery:
    """What opening a session log found at its end."""

    dropped_bytes: int = 0
    dropped_text: str = ""

    @property
    def recovered(self) -> bool:
        return self.dropped_bytes > 0


class _SessionLog:
    """Exclusive writer over one session's JSON-lines log."""

    def __init__(self, path: Path):
        self.path = path
        self.recovery = TailRecovery()
        self.events: list[SessionEvent] = []
        self._recover_and_load()
        self._fh = open(self.path, "a", encoding="utf-8")

    def _recover_and_load(self) -> None:
        if not self.path.exists():
            self.path.touch()
            return
        raw = self.path.read_bytes()
        keep = len(raw)
        tail = b""
        if raw and not raw.endswith(b"\n"):
            cut = raw.rfind(b"\n") + 1
            tail = raw[cut:]
            keep = cut
        else:
            # A crash mid-write can also leave a complete but unparsable line.
            cut = raw.rfind(b"\n", 0, keep - 1) + 1 if raw else 0
            last_line = raw[cut:keep]
            if last_line:
                try:
                    json.loads(last_line.decode("utf-8"))
                except (ValueError, UnicodeDecodeError):
                    tail = last_line
                    keep = cut
        if tail:
            with open(self.path, "r+b") as fh:
                fh.truncate(keep)
                fh.flush()
                os.fsync(fh.fileno())
            self.recovery = TailRecovery(
                dropped_bytes=len(tail), dropped_text=tail.decode("utf-8", errors="replace")
            )
        for lineno, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), start=1):
            try:
                obj = json.loads(line)
            except ValueError as exc:
                raise ProfilingError("corrupt-log", f"{self.path.name}: line {lineno} is not valid JSON") from exc
            self.events.append(event_from_json(obj))

    @property
    def last_seq(self) -> int:
        return self.events[-1].seq if self.events else 0

    def append(self, events: list[SessionEvent]) -> None:
        expected = self.last_seq + 1
        for event in events:
            if event.seq != expected:
                raise ProfilingError(
                    "seq-conflict",
                    f"{self.path.name}: expected seq {expected}, got {event.seq}",
                )
            expected += 1
        self._fh.write("".join(event_line(e) for e in events))
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self.events.extend(events)

    def close(self) -> None:
        self._fh.close()


class Project:
    """Directory-backed store for one evaluation project."""

    def __init__(self, root: str | Path, create: bool = False):
        self.root = Path(root)
        manifest_path = self.root / "manifest.json"
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
            for sub in _SUBDIRS:
                (self.root / sub).mkdir(exist_ok=True)
            if not manifest_path.exists():
                self._manifest = {kind: {} for kind in _KIND_DIRS}
                self._write_manifest()
        if not manifest_path.exists():
            raise ProfilingError("not-found", f"{self.root} is not a project directory (no manifest.json)")
        self._manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        self._logs: dict[str, _SessionLog] = {}
        self._lock = threading.Lock()

    # -- manifest ----------------------------------------------------------

    def _write_manifest(self) -> None:
        _atomic_write(self.root / "manifest.json", canonical_json(self._manifest))

    def list_ids(self, kind: str) -> list[str]:
        return sorted(self._manifest.get(kind, {}))

    # -- whole artifacts ---------------------------------------------------

    def put_artifact(self, kind: str, content: dict) -> str:
        """Validate and store one artifact; returns its id.

        ``content`` is the artifact's wire-format object. Validation happens
        before anything touches the disk, and the write itself is atomic.
        """
        if kind not in _KIND_DIRS:
            raise ProfilingError("invalid-config", f"unknown artifact kind {kind!r}")
        violations = self._validate_artifact(kind, content)
        if violations:
            summary = "; ".join(str(v) for v in violations[:5])
            raise ProfilingError("validation-failed", f"{kind} failed validation: {summary}")

        artifact_id = content["id"]
        if not is_valid_id(artifact_id):
            raise ProfilingError("validation-failed", f"{kind} id {artifact_id!r} is not filesystem-safe")
        if artifact_id in self._manifest[kind]:
            raise ProfilingError("duplicate-id", f"{kind} {artifact_id!r} already stored")

        rel = f"{_KIND_DIRS[kind]}/{artifact_id}.json"
        try:
            _atomic_write(self.root / rel, canonical_json(content))
        except OSError as exc:
            raise ProfilingError("io-error", f"cannot write {rel}: {exc}") from exc
        self._manifest[kind][artifact_id] = rel
        self._write_manifest()
        return artifact_id

    def _validate_artifact(self, kind: str, content: dict) -> list:
        if kind == KIND_DOCUMENT:
            return validate_document(content)
        if kind == KIND_INVENTORY:
            return validate_inventory(inventory_from_json(content))
        inventory_id = content.get("inventory_id")
        if inventory_id not in self._manifest[KIND_INVENTORY]:
            raise ProfilingError(
                "validation-failed",
                f"dialog tree references inventory {inventory_id!r} which is not stored",
            )
        return validate_tree(dialog_tree_from_json(content), self.get_inventory(inventory_id))

    def _read_artifact(self, kind: str, artifact_id: str) -> dict:
        rel = self._manifest.get(kind, {}).get(artifact_id)
        if rel is None:
            raise ProfilingError("not-found", f"no {kind} with id {artifact_id!r}")
        return json.loads((self.root / rel).read_text(encoding="utf-8"))

    def get_document(self, document_id: str) -> TextDocument:
        return document_from_json(self._read_artifact(KIND_DOCUMENT, document_id))

    def get_inventory(self, inventory_id: str) -> ConjunctInventory:
        return inventory_from_json(self._read_artifact(KIND_INVENTORY, inventory_id))

    def get_dialog_tree(self, tree_id: str) -> DialogTree:
        return dialog_tree_from_json(self._read_artifact(KIND_DIALOG_TREE, tree_id))

    def put_document(self, doc: TextDocument) -> str:
        return self.put_artifact(KIND_DOCUMENT, document_to_json(doc))

    def put_inventory(self, inv: ConjunctInventory) -> str:
        return self.put_artifact(KIND_INVENTORY, inventory_to_json(inv))

    def put_dialog_tree(self, tree: DialogTree) -> str:
        return self.put_artifact(KIND_DIALOG_TREE, dialog_tree_to_json(tree))

    # -- session logs --------------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        if not is_valid_id(session_id):
            raise ProfilingError("validation-failed", f"session id {session_id!r} is not filesystem-safe")
        return self.root / "sessions" / f"{session_id}.jsonl"

    def _session_log(self, session_id: str, must_exist: bool) -> _SessionLog:
        with self._lock:
            log = self._logs.get(session_id)
            if log is None:
                path = self._session_path(session_id)
                if must_exist and not path.exists():
                    raise ProfilingError("not-found", f"no session log for {session_id!r}")
                log = _SessionLog(path)
                self._logs[session_id] = log
            return log

    def append_event(self, session_id: str, event: SessionEvent) -> None:
        self.append_events(session_id, [event])

    def append_events(self, session_id: str, events: list[SessionEvent]) -> None:
        """Durably append events; seq must continue exactly where the log ends."""
        if not events:
            return
        log = self._session_log(session_id, must_exist=False)
        log.append(events)

    def read_session_events(self, session_id: str) -> list[SessionEvent]:
        return list(self._session_log(session_id, must_exist=True).events)

    def session_recovery(self, session_id: str) -> TailRecovery:
        return self._session_log(session_id, must_exist=True).recovery

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "sessions").glob("*.jsonl"))

    def load_session(
        self,
        session_id: str,
        doc: TextDocument | None = None,
        tree: DialogTree | None = None,
        inv: ConjunctInventory | None = None,
    ) -> SessionState:
        """Replay a stored log into a live, resumable session state.

        The document, tree, and inventory default to the ones named in the
        log's opening event.
        """
        events = self.read_session_events(session_id)
        if not events:
            raise ProfilingError("corrupt-log", f"session {session_id!r} has an empty log")
        payload = events[0].payload
        if doc is None:
            doc = self.get_document(payload.get("document_id", ""))
        if tree is None:
            tree = self.get_dialog_tree(payload.get("dialog_tree_id", ""))
        if inv is None:
            inv = self.get_inventory(tree.inventory_id)
        return replay(events, doc, tree, inv)

    # -- profiles ------------------------------------------------------------

    def save_profile(self, session_id: str, profile: ConnectivityProfile) -> None:
        """Store the assembled profile of a finalized session.

        Unlike config artifacts this overwrites: backtracking across a
        finalized pair and re-finalizing legitimately replaces the profile.
        """
        path = self.root / "profiles" / f"{session_id}.json"
        _atomic_write(path, canonical_json(profile_to_json(profile)))

    def load_profile(self, session_id: str) -> ConnectivityProfile:
        path = self.root / "profiles" / f"{session_id}.json"
        if not path.exists():
            raise ProfilingError("not-found", f"no profile for session {session_id!r}")
        return profile_from_json(json.loads(path.read_text(encoding="utf-8")))

    def profile_session_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "profiles").glob("*.json"))

    def profiles_by_document(self, document_id: str) -> list[tuple[str, ConnectivityProfile]]:
        """(session_id, profile) pairs for one document, in session-id order."""
        out = []
        for session_id in self.profile_session_ids():
            profile = self.load_profile(session_id)
            if profile.document_id == document_id:
                out.append((session_id, profile))
        return out

    def close(self) -> None:
        with self._lock:
            for log in self._logs.values():
                log.close()
            self._logs.clear()
