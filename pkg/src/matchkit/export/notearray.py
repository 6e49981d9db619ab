"""Tabular note arrays and pianoroll matrices.

Note arrays list one row per note (or per alignment relation in joined
mode); score rows are timed in beats, performance rows in seconds.
Pianorolls are 128 x time-bin matrices with velocity (or 0/1) cells.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..model import Deletion, MatchDocument, spelled_to_midi
from ..semantics import build_note_mapping, build_time_map, tick_to_seconds
from .smf import ExportError

SIDES = ("score", "performance", "joined")

CSV_COLUMNS = ("side", "id", "pitch", "onset", "duration", "velocity", "anchor_link")

# default time-bin widths: 10 ms for performances, a 16th at x/4 for scores
PERF_RESOLUTION = 0.01
SCORE_RESOLUTION = 0.25


@dataclass(frozen=True)
class NoteArrayRow:
    side: str              # "score" or "performance"
    id: str
    pitch: int | None
    onset: float           # beats for score rows, seconds for performance rows
    duration: float
    velocity: int | None = None
    anchor_link: str | None = None  # the id on the other side, when aligned


def _score_rows(doc: MatchDocument, links: dict[str, int]) -> list[NoteArrayRow]:
    rows = []
    for _line, score in doc.iter_score_notes():
        try:
            pitch = spelled_to_midi(score.pitch)
        except ValueError:
            pitch = None
        onset = score.position.onset_in_beats.value
        link = links.get(score.anchor.text)
        rows.append(
            NoteArrayRow(
                side="score",
                id=score.anchor.text,
                pitch=pitch,
                onset=onset,
                duration=score.offset_in_beats.value - onset,
                anchor_link=None if link is None else str(link),
            )
        )
    return rows


def _perf_rows(doc: MatchDocument, anchor_of: dict[int, str]) -> list[NoteArrayRow]:
    notes = list(doc.iter_perf_notes())
    if not notes:
        return []
    tm = build_time_map(doc)
    if tm.ticks_per_quarter is None or tm.microseconds_per_quarter is None:
        raise ExportError("performance rows need the midiClockUnits/midiClockRate header")
    rows = []
    for _line, perf in notes:
        onset = tick_to_seconds(perf.onset_tick, tm)
        rows.append(
            NoteArrayRow(
                side="performance",
                id=str(perf.id),
                pitch=perf.midi_pitch,
                onset=onset,
                duration=tick_to_seconds(perf.offset_tick, tm) - onset,
                velocity=perf.velocity,
                anchor_link=anchor_of.get(perf.id),
            )
        )
    return rows


def to_note_array(doc: MatchDocument, side: str = "joined") -> list[NoteArrayRow]:
    """Flatten the document into note rows.

    Joined mode emits one row per alignment relation: matched and ornament
    notes as performance rows linking their anchor, insertions as
    performance rows with no link, deletions as score rows with no link.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    mapping, _ = build_note_mapping(doc)
    anchor_of = {pid: a.text for pid, a in mapping.matches.items()}
    anchor_of.update({pid: a.text for pid, (a, _k) in mapping.ornament_notes.items()})
    links = {a.text: pid for pid, a in mapping.matches.items()}

    if side == "score":
        return _score_rows(doc, links)
    if side == "performance":
        return _perf_rows(doc, anchor_of)
    perf_rows = _perf_rows(doc, anchor_of)
    deletion_rows = [
        row
        for (line, score), row in zip(doc.iter_score_notes(), _score_rows(doc, links))
        if isinstance(line, Deletion)
    ]
    return perf_rows + deletion_rows


def note_array_to_csv(rows: list[NoteArrayRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        record = asdict(row)
        writer.writerow(["" if record[c] is None else record[c] for c in CSV_COLUMNS])
    return buffer.getvalue()


def note_array_to_json(rows: list[NoteArrayRow]) -> str:
    return json.dumps([asdict(row) for row in rows], indent=2) + "\n"


def to_pianoroll(
    doc: MatchDocument,
    side: str = "performance",
    resolution: float | None = None,
    weighted: bool = True,
) -> np.ndarray:
    """Rasterize one side into a (128, time-bins) matrix.

    Performance cells hold velocity (or 1 with weighted=False), score cells
    are binary.  Overlaps keep the maximum, so the result is independent of
    note order.  Every note covers at least one bin.
    """
    if side not in ("score", "performance"):
        raise ValueError(f"pianoroll side must be score or performance, got {side!r}")
    if resolution is None:
        resolution = PERF_RESOLUTION if side == "performance" else SCORE_RESOLUTION
    if resolution <= 0:
        raise ValueError("resolution must be positive")

    spans = []  # (pitch, start, end, value)
    if side == "performance":
        tm = build_time_map(doc)
        for _line, perf in doc.iter_perf_notes():
            if not 0 <= perf.midi_pitch <= 127:
                continue
            value = min(max(perf.velocity, 0), 127) if weighted else 1
            spans.append(
                (
                    perf.midi_pitch,
                    tick_to_seconds(perf.onset_tick, tm),
                    tick_to_seconds(perf.offset_tick, tm),
                    value,
                )
            )
    else:
        for _line, score in doc.iter_score_notes():
            try:
                pitch = spelled_to_midi(score.pitch)
            except ValueError:
                continue
            onset = score.position.onset_in_beats.value
            spans.append((pitch, onset, score.offset_in_beats.value, 1))

    if not spans:
        return np.zeros((128, 0), dtype=np.int16)
    bins = []
    for pitch, start, end, value in spans:
        lo = max(int(start / resolution), 0)
        hi = max(math.ceil(end / resolution), lo + 1)
        bins.append((pitch, lo, hi, value))
    roll = np.zeros((128, max(hi for _p, _lo, hi, _v in bins)), dtype=np.int16)
    for pitch, lo, hi, value in bins:
        roll[pitch, lo:hi] = np.maximum(roll[pitch, lo:hi], value)
    return roll
