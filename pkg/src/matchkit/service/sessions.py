"""In-memory document sessions with optional file-backed persistence.

A session owns one parsed document plus its edit history.  Edits are
serialized per session (asyncio lock); the version counter bumps by one
per committed change, undo included, so clients can detect staleness.
"""

from __future__ import annotations

import asyncio
import json
import secrets
from dataclasses import dataclass, field
from pathlib import Path

from ..model import MatchDocument
from ..parser import Diagnostic, parse, serialize


@dataclass
class DocumentSession:
    id: str
    document: MatchDocument
    version: int = 1
    undo_stack: list[MatchDocument] = field(default_factory=list)
    dirty: bool = False
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    def commit(self, document: MatchDocument):
        self.undo_stack.append(self.document)
        self.document = document
        self.version += 1
        self.dirty = True

    def undo(self) -> bool:
        if not self.undo_stack:
            return False
        self.document = self.undo_stack.pop()
        self.version += 1
        self.dirty = True
        return True


class SessionStore:
    def __init__(self, state_dir: str | Path | None = None):
        self._sessions: dict[str, DocumentSession] = {}
        self._state_dir = Path(state_dir) if state_dir else None
        if self._state_dir:
            self._state_dir.mkdir(parents=True, exist_ok=True)
            self._load_all()

    def create(self, text: str) -> tuple[DocumentSession, list[Diagnostic]]:
        document, diagnostics = parse(text)
        session = DocumentSession(id=secrets.token_hex(8), document=document)
        self._sessions[session.id] = session
        self.persist(session)
        return session, diagnostics

    def get(self, session_id: str) -> DocumentSession | None:
        return self._sessions.get(session_id)

    def persist(self, session: DocumentSession):
        if not self._state_dir:
            return
        (self._state_dir / f"{session.id}.match").write_text(
            serialize(session.document), encoding="utf-8"
        )
        (self._state_dir / f"{session.id}.json").write_text(
            json.dumps({"version": session.version}), encoding="utf-8"
        )

    def _load_all(self):
        # undo history is per-process; reloaded sessions start with none
        for match_path in sorted(self._state_dir.glob("*.match")):
            meta_path = match_path.with_suffix(".json")
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
            except (OSError, ValueError):
                meta = {"version": 1}
            document, _ = parse(match_path.read_text(encoding="utf-8"))
            session = DocumentSession(
                id=match_path.stem,
                document=document,
                version=int(meta.get("version", 1)),
            )
            self._sessions[session.id] = session
