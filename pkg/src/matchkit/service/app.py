"""FastAPI edit service: load match documents, serve alignment and
time-map views, apply note-alignment edits transactionally with optimistic
concurrency, and hand back the serialized file."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse

from ..model import MatchDocument, spelled_to_midi
from ..parser import serialize
from ..semantics import (
    TimeMapError,
    build_note_mapping,
    build_time_map,
    tick_to_seconds,
    validate,
)
from .edits import EditError, EditOp, apply_edits, canonical_sort
from .schemas import (
    AlignmentResponse,
    CreateDocResponse,
    DocMetaResponse,
    EditsRequest,
    EditsResponse,
    MatchOut,
    OrnamentOut,
    PerfNoteOut,
    ScoreNoteOut,
    TimeAnchorOut,
    TimeMapResponse,
)
from .sessions import DocumentSession, SessionStore

DEFAULT_MAX_BODY = 8 * 1024 * 1024


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


def _diag_dicts(diags) -> list[dict]:
    return [d.to_dict() for d in diags]


def _alignment_payload(session: DocumentSession) -> AlignmentResponse:
    doc = session.document
    mapping, _ = build_note_mapping(doc)
    tm = build_time_map(doc)

    def seconds(tick: int) -> float | None:
        try:
            return tick_to_seconds(tick, tm)
        except TimeMapError:
            return None

    score_notes = []
    for _line, s in doc.iter_score_notes():
        try:
            pitch = spelled_to_midi(s.pitch)
        except ValueError:
            pitch = None
        score_notes.append(
            ScoreNoteOut(
                anchor=s.anchor.text,
                pitch=pitch,
                spelling=f"{s.pitch.step}{s.pitch.modifier}{s.pitch.octave}",
                onset_beats=s.position.onset_in_beats.value,
                offset_beats=s.offset_in_beats.value,
                attributes=list(s.attributes),
            )
        )
    perf_notes = [
        PerfNoteOut(
            id=p.id,
            pitch=p.midi_pitch,
            onset_tick=p.onset_tick,
            offset_tick=p.offset_tick,
            velocity=p.velocity,
            channel=p.channel,
            track=p.track,
            onset_seconds=seconds(p.onset_tick),
            offset_seconds=seconds(p.offset_tick),
        )
        for _line, p in doc.iter_perf_notes()
    ]
    return AlignmentResponse(
        version=session.version,
        matches=[
            MatchOut(perf_id=pid, anchor=a.text) for pid, a in sorted(mapping.matches.items())
        ],
        insertions=sorted(mapping.insertions),
        deletions=sorted(a.text for a in mapping.deletions),
        ornaments=[
            OrnamentOut(perf_id=pid, anchor=a.text, kind=kind)
            for pid, (a, kind) in sorted(mapping.ornament_notes.items())
        ],
        score_notes=score_notes,
        perf_notes=perf_notes,
    )


def create_app(state_dir: str | None = None, max_body_bytes: int = DEFAULT_MAX_BODY) -> FastAPI:
    app = FastAPI(title="matchkit edit service", version="1.0.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(state_dir)
    app.state.store = store

    def _session(doc_id: str) -> DocumentSession:
        session = store.get(doc_id)
        if session is None:
            raise _error(404, "unknown-document", f"no document session {doc_id}")
        return session

    @app.post("/v1/docs", response_model=CreateDocResponse, status_code=201)
    async def create_doc(request: Request):
        body = await request.body()
        if len(body) > max_body_bytes:
            raise _error(413, "too-large", f"body exceeds {max_body_bytes} bytes")
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            raise _error(422, "bad-encoding", "body is not valid UTF-8")
        session, diagnostics = store.create(text)
        if not session.document.lines:
            raise _error(422, "empty-document", "no lines could be parsed")
        return CreateDocResponse(
            id=session.id, version=session.version, diagnostics=_diag_dicts(diagnostics)
        )

    @app.get("/v1/docs/{doc_id}", response_model=DocMetaResponse)
    async def doc_meta(doc_id: str):
        session = _session(doc_id)
        return DocMetaResponse(
            id=session.id,
            version=session.version,
            dirty=session.dirty,
            line_count=len(session.document.lines),
        )

    @app.get("/v1/docs/{doc_id}/file", response_class=PlainTextResponse)
    async def doc_file(doc_id: str):
        session = _session(doc_id)
        return PlainTextResponse(serialize(session.document), media_type="text/plain")

    @app.get("/v1/docs/{doc_id}/alignment", response_model=AlignmentResponse)
    async def doc_alignment(doc_id: str):
        return _alignment_payload(_session(doc_id))

    @app.get("/v1/docs/{doc_id}/timemap", response_model=TimeMapResponse)
    async def doc_timemap(doc_id: str):
        session = _session(doc_id)
        tm = build_time_map(session.document)

        def seconds(tick: int) -> float | None:
            try:
                return tick_to_seconds(tick, tm)
            except TimeMapError:
                return None

        return TimeMapResponse(
            version=session.version,
            ticks_per_quarter=tm.ticks_per_quarter,
            microseconds_per_quarter=tm.microseconds_per_quarter,
            anchors=[
                TimeAnchorOut(
                    beats=a.beats,
                    tick=a.tick,
                    kind=a.kind,
                    seconds=seconds(a.tick),
                    alternates=list(a.alternates),
                )
                for a in tm.anchors
            ],
        )

    def _commit(session: DocumentSession, document: MatchDocument) -> EditsResponse:
        session.commit(document)
        store.persist(session)
        return EditsResponse(
            version=session.version, diagnostics=_diag_dicts(validate(session.document))
        )

    @app.post("/v1/docs/{doc_id}/edits", response_model=EditsResponse)
    async def doc_edits(doc_id: str, request: EditsRequest):
        session = _session(doc_id)
        async with session.lock:
            if request.base_version != session.version:
                raise _error(
                    409, "version-conflict",
                    f"base_version {request.base_version} but document is at {session.version}",
                )
            ops = [EditOp(op.kind, op.perf_id, op.anchor) for op in request.ops]
            try:
                document = apply_edits(session.document, ops)
            except EditError as exc:
                raise _error(422, exc.code, str(exc))
            return _commit(session, document)

    @app.post("/v1/docs/{doc_id}/undo", response_model=EditsResponse)
    async def doc_undo(doc_id: str):
        session = _session(doc_id)
        async with session.lock:
            if not session.undo_stack:
                raise _error(409, "nothing-to-undo", "no edits to undo")
            session.undo()
            store.persist(session)
            return EditsResponse(
                version=session.version, diagnostics=_diag_dicts(validate(session.document))
            )

    @app.post("/v1/docs/{doc_id}/fmt", response_model=EditsResponse)
    async def doc_fmt(doc_id: str):
        session = _session(doc_id)
        async with session.lock:
            return _commit(session, canonical_sort(session.document))

    return app
