"""Durable append-only storage.

One JSONL file per session (header line, then one line per event), plus
shared JSONL logs for profile snapshots, feedback and questionnaire results.
Every append is flushed and fsynced before the caller gets control back, so
an acknowledged event survives a crash. Loading tolerates a torn final line,
which is what a crash mid-write leaves behind.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path


class StoreError(RuntimeError):
    pass


@dataclass
class SessionRecord:
    header: dict
    entries: list[dict] = field(default_factory=list)


@dataclass
class StoreSnapshot:
    sessions: dict[str, SessionRecord] = field(default_factory=dict)
    profiles: dict[str, dict] = field(default_factory=dict)
    feedback: list[dict] = field(default_factory=list)
    instruments: list[dict] = field(default_factory=list)


class MemoryStore:
    """Store interface backed by plain lists; for tests and `simulate`."""

    def __init__(self):
        self._lock = threading.Lock()
        self.snapshot = StoreSnapshot()

    def create_session(self, header: dict) -> None:
        with self._lock:
            sid = header["session_id"]
            if sid in self.snapshot.sessions:
                raise StoreError(f"session {sid!r} already stored")
            self.snapshot.sessions[sid] = SessionRecord(header=dict(header))

    def append_event(self, session_id: str, entry: dict) -> None:
        with self._lock:
            try:
                record = self.snapshot.sessions[session_id]
            except KeyError:
                raise StoreError(f"no stored session {session_id!r}") from None
            record.entries.append(dict(entry))

    def save_profile(self, doc: dict) -> None:
        with self._lock:
            self.snapshot.profiles[doc["user_id"]] = dict(doc)

    def append_feedback(self, doc: dict) -> None:
        with self._lock:
            self.snapshot.feedback.append(dict(doc))

    def append_instrument(self, doc: dict) -> None:
        with self._lock:
            self.snapshot.instruments.append(dict(doc))

    def load_all(self) -> StoreSnapshot:
        with self._lock:
            return StoreSnapshot(
                sessions={
                    sid: SessionRecord(header=dict(r.header), entries=[dict(e) for e in r.entries])
                    for sid, r in self.snapshot.sessions.items()
                },
                profiles={uid: dict(d) for uid, d in self.snapshot.profiles.items()},
                feedback=[dict(d) for d in self.snapshot.feedback],
                instruments=[dict(d) for d in self.snapshot.instruments],
            )


def _append_line(path: Path, doc: dict) -> None:
    line = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    try:
        with path.open("a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())
    except OSError as exc:
        raise StoreError(f"could not append to {path}: {exc}") from exc


def _read_lines(path: Path) -> list[dict]:
    docs: list[dict] = []
    try:
        raw = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return docs
    except OSError as exc:
        raise StoreError(f"could not read {path}: {exc}") from exc
    for line in raw.split("\n"):
        if not line:
            continue
        try:
            docs.append(json.loads(line))
        except json.JSONDecodeError:
            # torn tail line from a crash mid-write; everything before it counts
            break
    return docs


class FileStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        try:
            (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StoreError(f"could not create store at {self.root}: {exc}") from exc
        self._lock = threading.Lock()

    def _session_path(self, session_id: str) -> Path:
        safe = "".join(ch for ch in session_id if ch.isalnum() or ch in "-_")
        if not safe or safe != session_id:
            raise StoreError(f"unsafe session id {session_id!r}")
        return self.root / "sessions" / f"{safe}.jsonl"

    def create_session(self, header: dict) -> None:
        path = self._session_path(header["session_id"])
        with self._lock:
            if path.exists():
                raise StoreError(f"session {header['session_id']!r} already stored")
            _append_line(path, header)

    def append_event(self, session_id: str, entry: dict) -> None:
        path = self._session_path(session_id)
        if not path.exists():
            raise StoreError(f"no stored session {session_id!r}")
        _append_line(path, entry)

    def save_profile(self, doc: dict) -> None:
        _append_line(self.root / "profiles.jsonl", doc)

    def append_feedback(self, doc: dict) -> None:
        _append_line(self.root / "feedback.jsonl", doc)

    def append_instrument(self, doc: dict) -> None:
        _append_line(self.root / "instruments.jsonl", doc)

    def load_all(self) -> StoreSnapshot:
        snapshot = StoreSnapshot()
        for doc in _read_lines(self.root / "profiles.jsonl"):
            if isinstance(doc, dict) and "user_id" in doc:
                snapshot.profiles[doc["user_id"]] = doc  # latest line wins
        snapshot.feedback = [d for d in _read_lines(self.root / "feedback.jsonl") if isinstance(d, dict)]
        snapshot.instruments = [
            d for d in _read_lines(self.root / "instruments.jsonl") if isinstance(d, dict)
        ]
        sessions_dir = self.root / "sessions"
        if sessions_dir.is_dir():
            for path in sorted(sessions_dir.glob("*.jsonl")):
                lines = _read_lines(path)
                if not lines or not isinstance(lines[0], dict):
                    continue
                header = lines[0]
                sid = header.get("session_id")
                if not isinstance(sid, str):
                    continue
                snapshot.sessions[sid] = SessionRecord(
                    header=header, entries=[d for d in lines[1:] if isinstance(d, dict)]
                )
        return snapshot
