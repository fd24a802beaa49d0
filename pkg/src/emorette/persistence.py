"""Durable per-turn session snapshots and cross-session user attributes.

Two backends share one interface: an in-memory store for tests and an on-disk
store laying out one directory per session (`NNNN.turn` JSON snapshots), user
attribute files under `user/`, and an append-only `ratings.ndjson` log.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Protocol

from .core import SessionState, StackEntry, Value, VariableTable


class PersistenceError(RuntimeError):
    pass


class OutOfOrderWriteError(PersistenceError):
    """A snapshot with a turn index at or below the last stored one was rejected."""


# --- SessionState <-> JSON ----------------------------------------------------


def encode_session(state: SessionState) -> dict:
    return {
        "session_id": state.session_id,
        "current_state": state.current_state,
        "variables": state.variables.as_dict(),
        "stack": [asdict(e) for e in state.stack],
        "turn_index": state.turn_index,
        "rng_seed": state.rng_seed,
        "history": [[speaker, text] for speaker, text in state.history],
        "retry_count": state.retry_count,
        "components_visited": sorted(state.components_visited),
    }


def decode_session(doc: dict) -> SessionState:
    try:
        return SessionState(
            session_id=doc["session_id"],
            current_state=doc["current_state"],
            variables=VariableTable(doc.get("variables", {})),
            stack=[StackEntry(e["state_id"], e["life"]) for e in doc.get("stack", [])],
            turn_index=doc["turn_index"],
            rng_seed=doc.get("rng_seed", 0),
            history=[(s, t) for s, t in doc.get("history", [])],
            retry_count=doc.get("retry_count", 0),
            components_visited=set(doc.get("components_visited", [])),
        )
    except (KeyError, TypeError) as exc:
        raise PersistenceError(f"malformed session snapshot: {exc}") from exc


@dataclass
class UserRecord:
    user_id: str
    attributes: dict[str, Value]
    updated_at: str


class Store(Protocol):
    def save_turn(self, session_id: str, state: SessionState) -> None: ...
    def load_latest(self, session_id: str) -> SessionState | None: ...
    def last_saved_at(self, session_id: str) -> datetime | None: ...
    def merge_user_attributes(self, user_id: str, attrs: dict[str, Value]) -> UserRecord: ...
    def load_user(self, user_id: str) -> UserRecord | None: ...
    def append_rating(self, record: dict) -> None: ...
    def iter_ratings(self) -> Iterator[dict]: ...


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class MemoryStore:
    """Dict-backed store with the same ordering rules as the disk store."""

    def __init__(self):
        self._turns: dict[str, dict[int, dict]] = {}
        self._saved_at: dict[str, datetime] = {}
        self._users: dict[str, UserRecord] = {}
        self._ratings: list[dict] = []
        self._lock = threading.Lock()

    def save_turn(self, session_id: str, state: SessionState) -> None:
        with self._lock:
            turns = self._turns.setdefault(session_id, {})
            if turns and state.turn_index <= max(turns):
                raise OutOfOrderWriteError(
                    f"session {session_id}: turn {state.turn_index} not after {max(turns)}"
                )
            turns[state.turn_index] = encode_session(state)
            self._saved_at[session_id] = datetime.now(timezone.utc)

    def load_latest(self, session_id: str) -> SessionState | None:
        with self._lock:
            turns = self._turns.get(session_id)
            if not turns:
                return None
            return decode_session(turns[max(turns)])

    def last_saved_at(self, session_id: str) -> datetime | None:
        return self._saved_at.get(session_id)

    def merge_user_attributes(self, user_id: str, attrs: dict[str, Value]) -> UserRecord:
        with self._lock:
            existing = self._users.get(user_id)
            merged = dict(existing.attributes) if existing else {}
            merged.update(attrs)
            record = UserRecord(user_id, merged, _now())
            self._users[user_id] = record
            return record

    def load_user(self, user_id: str) -> UserRecord | None:
        return self._users.get(user_id)

    def append_rating(self, record: dict) -> None:
        with self._lock:
            self._ratings.append(dict(record))

    def iter_ratings(self) -> Iterator[dict]:
        return iter(list(self._ratings))


class DiskStore:
    """One directory per session of `NNNN.turn` snapshot files.

    Writes go through a temp file, fsync, and atomic rename, so an
    acknowledged turn survives a crash immediately after.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "user").mkdir(exist_ok=True)
        self._lock = threading.Lock()

    def _session_dir(self, session_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in session_id)
        return self.root / "sessions" / safe

    def _latest_turn(self, session_dir: Path) -> int | None:
        if not session_dir.exists():
            return None
        turns = [int(p.stem) for p in session_dir.glob("*.turn") if p.stem.isdigit()]
        return max(turns) if turns else None

    @staticmethod
    def _atomic_write(path: Path, payload: str) -> None:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise

    def save_turn(self, session_id: str, state: SessionState) -> None:
        with self._lock:
            session_dir = self._session_dir(session_id)
            session_dir.mkdir(parents=True, exist_ok=True)
            last = self._latest_turn(session_dir)
            if last is not None and state.turn_index <= last:
                raise OutOfOrderWriteError(
                    f"session {session_id}: turn {state.turn_index} not after {last}"
                )
            path = session_dir / f"{state.turn_index:04d}.turn"
            doc = encode_session(state)
            doc["saved_at"] = _now()
            self._atomic_write(path, json.dumps(doc, ensure_ascii=False))

    def _read_latest(self, session_id: str) -> dict | None:
        session_dir = self._session_dir(session_id)
        last = self._latest_turn(session_dir)
        if last is None:
            return None
        path = session_dir / f"{last:04d}.turn"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise PersistenceError(f"corrupt snapshot for session {session_id} at {path}") from exc

    def load_latest(self, session_id: str) -> SessionState | None:
        doc = self._read_latest(session_id)
        return None if doc is None else decode_session(doc)

    def last_saved_at(self, session_id: str) -> datetime | None:
        doc = self._read_latest(session_id)
        if doc is None or "saved_at" not in doc:
            return None
        return datetime.fromisoformat(doc["saved_at"])

    def _user_path(self, user_id: str) -> Path:
        safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in user_id)
        return self.root / "user" / f"{safe}.json"

    def merge_user_attributes(self, user_id: str, attrs: dict[str, Value]) -> UserRecord:
        with self._lock:
            existing = self.load_user(user_id)
            merged = dict(existing.attributes) if existing else {}
            merged.update(attrs)
            record = UserRecord(user_id, merged, _now())
            self._atomic_write(
                self._user_path(user_id),
                json.dumps({"user_id": user_id, "attributes": merged, "updated_at": record.updated_at}),
            )
            return record

    def load_user(self, user_id: str) -> UserRecord | None:
        path = self._user_path(user_id)
        if not path.exists():
            return None
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise PersistenceError(f"corrupt user record at {path}") from exc
        return UserRecord(doc["user_id"], doc.get("attributes", {}), doc.get("updated_at", ""))

    def append_rating(self, record: dict) -> None:
        with self._lock:
            path = self.root / "ratings.ndjson"
            with open(path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record, ensure_ascii=False) + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def iter_ratings(self) -> Iterator[dict]:
        path = self.root / "ratings.ndjson"
        if not path.exists():
            return iter(())
        records = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return iter(records)


def save_turn(store: Store, session_id: str, state: SessionState) -> None:
    store.save_turn(session_id, state)


def load_latest(store: Store, session_id: str) -> SessionState | None:
    return store.load_latest(session_id)


def merge_user_attributes(store: Store, user_id: str, attrs: dict[str, Value]) -> UserRecord:
    return store.merge_user_attributes(user_id, attrs)
