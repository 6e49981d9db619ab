"""Pydantic request/response models for the /v1 edit service API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class DiagnosticOut(BaseModel):
    severity: Literal["error", "warning"]
    line: int
    column: int
    code: str
    message: str


class CreateDocResponse(BaseModel):
    id: str
    version: int
    diagnostics: list[DiagnosticOut]


class DocMetaResponse(BaseModel):
    id: str
    version: int
    dirty: bool
    line_count: int


class EditOpIn(BaseModel):
    kind: Literal["set_match", "set_insertion", "set_deletion", "clear"]
    perf_id: int | None = None
    anchor: str | None = None


class EditsRequest(BaseModel):
    base_version: int
    ops: list[EditOpIn] = Field(default_factory=list)


class EditsResponse(BaseModel):
    version: int
    diagnostics: list[DiagnosticOut]


class MatchOut(BaseModel):
    perf_id: int
    anchor: str


class OrnamentOut(BaseModel):
    perf_id: int
    anchor: str
    kind: Literal["ornament", "trill"]


class ScoreNoteOut(BaseModel):
    anchor: str
    pitch: int | None
    spelling: str
    onset_beats: float
    offset_beats: float
    attributes: list[str]


class PerfNoteOut(BaseModel):
    id: int
    pitch: int
    onset_tick: int
    offset_tick: int
    velocity: int
    channel: int
    track: int
    onset_seconds: float | None
    offset_seconds: float | None


class AlignmentResponse(BaseModel):
    version: int
    matches: list[MatchOut]
    insertions: list[int]
    deletions: list[str]
    ornaments: list[OrnamentOut]
    score_notes: list[ScoreNoteOut]
    perf_notes: list[PerfNoteOut]


class TimeAnchorOut(BaseModel):
    beats: float
    tick: int
    kind: Literal["beat", "downbeat"]
    seconds: float | None
    alternates: list[int]


class TimeMapResponse(BaseModel):
    version: int
    ticks_per_quarter: int | None
    microseconds_per_quarter: int | None
    anchors: list[TimeAnchorOut]


class ErrorDetail(BaseModel):
    code: str
    message: str
