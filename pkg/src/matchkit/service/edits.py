"""Note-alignment edits as minimal line rewrites over a document.

Each operation either preserves the note-mapping partition (every
performance note stays exactly one of matched/inserted/ornament, every
score note matched or deleted once) or raises EditError without touching
anything; batches are applied atomically by the caller keeping the old
document on failure.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import (
    Deletion,
    Info,
    Insertion,
    Line,
    MatchDocument,
    NoteAlign,
    Opaque,
    OrnamentAlign,
    ScoreProp,
    Section,
    Sustain,
    TimeAlign,
)
from ..semantics import TimeMapError, build_note_mapping, build_time_map, perf_to_score

EDIT_KINDS = ("set_match", "set_insertion", "set_deletion", "clear")


class EditError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class EditOp:
    kind: str
    perf_id: int | None = None
    anchor: str | None = None


def _index(lines: list[Line]):
    perf_at: dict[int, int] = {}
    anchor_at: dict[str, int] = {}
    for i, line in enumerate(lines):
        if isinstance(line, (NoteAlign, Insertion, OrnamentAlign)):
            perf_at.setdefault(line.perf.id, i)
        if isinstance(line, (NoteAlign, Deletion)):
            anchor_at.setdefault(line.score.anchor.text, i)
    return perf_at, anchor_at


def _require_perf(perf_at, pid) -> int:
    if pid is None:
        raise EditError("bad-op", "operation needs perf_id")
    if pid not in perf_at:
        raise EditError("unknown-perf-note", f"no performance note {pid}")
    return perf_at[pid]


def _require_anchor(anchor_at, anchor) -> int:
    if not anchor:
        raise EditError("bad-op", "operation needs anchor")
    if anchor not in anchor_at:
        raise EditError("unknown-anchor", f"no score note {anchor}")
    return anchor_at[anchor]


def _unlink_at(lines: list[Line], i: int):
    """Split a NoteAlign into Deletion + Insertion, keeping the position."""
    line = lines[i]
    lines[i:i + 1] = [Deletion(line.score), Insertion(line.perf)]


def _apply_one(lines: list[Line], op: EditOp):
    perf_at, anchor_at = _index(lines)

    if op.kind == "set_match":
        pi = _require_perf(perf_at, op.perf_id)
        perf_line = lines[pi]
        if isinstance(perf_line, OrnamentAlign):
            raise EditError("ornament-locked", f"note {op.perf_id} belongs to an ornament line")
        ai = _require_anchor(anchor_at, op.anchor)
        anchor_line = lines[ai]
        if isinstance(anchor_line, NoteAlign):
            if anchor_line.perf.id == op.perf_id:
                return  # already linked exactly so
            raise EditError("anchor-already-matched", f"score note {op.anchor} is already matched")
        new_line = NoteAlign(anchor_line.score, perf_line.perf)
        if isinstance(perf_line, Insertion):
            # the new alignment takes the insertion's slot (performance order)
            lines[pi] = new_line
            del lines[ai]
        else:  # relink: old partner becomes a deletion next to the new line
            lines[pi:pi + 1] = [Deletion(perf_line.score), new_line]
            del lines[ai if ai < pi else ai + 1]

    elif op.kind == "set_insertion":
        pi = _require_perf(perf_at, op.perf_id)
        line = lines[pi]
        if isinstance(line, OrnamentAlign):
            raise EditError("ornament-locked", f"note {op.perf_id} belongs to an ornament line")
        if isinstance(line, NoteAlign):
            _unlink_at(lines, pi)

    elif op.kind == "set_deletion":
        ai = _require_anchor(anchor_at, op.anchor)
        if isinstance(lines[ai], NoteAlign):
            _unlink_at(lines, ai)

    elif op.kind == "clear":
        if (op.perf_id is None) == (op.anchor is None):
            raise EditError("bad-op", "clear needs exactly one of perf_id or anchor")
        if op.perf_id is not None:
            _apply_one(lines, EditOp("set_insertion", perf_id=op.perf_id))
        else:
            _apply_one(lines, EditOp("set_deletion", anchor=op.anchor))

    else:
        raise EditError("bad-op", f"unknown edit kind: {op.kind!r}")


def apply_edits(doc: MatchDocument, ops: list[EditOp]) -> MatchDocument:
    """Apply ops in order; raises EditError leaving the input untouched."""
    lines = list(doc.lines)
    for op in ops:
        _apply_one(lines, op)
    new_doc = MatchDocument(tuple(lines))
    _, diags = build_note_mapping(new_doc)
    if diags:
        raise EditError("partition-violation", diags[0].message)
    return new_doc


def canonical_sort(doc: MatchDocument) -> MatchDocument:
    """Re-sort lines canonically: header info, score properties by onset,
    then note/time lines by score beat (time anchors first at equal beats,
    performance-only lines placed via the time map), sections, sustains."""
    tm = build_time_map(doc)

    def perf_beats(tick: int) -> float:
        try:
            return perf_to_score(tick, tm)
        except TimeMapError:
            return float("inf")

    def group(line: Line) -> tuple:
        if isinstance(line, Info):
            return (0, 0.0, 0)
        if isinstance(line, ScoreProp):
            return (1, line.onset_in_beats.value, 0)
        if isinstance(line, TimeAlign):
            return (2, line.point.onset_in_beats.value, 0)
        if isinstance(line, (NoteAlign, Deletion)):
            return (2, line.score.position.onset_in_beats.value, 1)
        if isinstance(line, (Insertion, OrnamentAlign)):
            return (2, perf_beats(line.perf.onset_tick), 1)
        if isinstance(line, Opaque):
            return (3, 0.0, 0)
        if isinstance(line, Section):
            return (4, line.begin_unfolded.value, 0)
        if isinstance(line, Sustain):
            return (5, float(line.tick), 0)
        return (6, 0.0, 0)

    ordered = sorted(range(len(doc.lines)), key=lambda i: (*group(doc.lines[i]), i))
    return MatchDocument(tuple(doc.lines[i] for i in ordered))
