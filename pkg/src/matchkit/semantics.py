"""Interpretation of parsed match documents: the note-alignment partial
function, score/performance time maps, tempo curves, repetition unfolding,
and the document validator.

Everything here is pure over immutable documents.  Construction never
fails on bad data; problems surface as diagnostics (or as coded exceptions
for point queries like score_to_perf).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .model import (
    Anchor,
    Deletion,
    Fraction,
    Info,
    Insertion,
    MatchDocument,
    NoteAlign,
    OrnamentAlign,
    ScoreProp,
    ScoreTimePoint,
    Section,
    Sustain,
    TimeAlign,
    fraction_to_beats,
    spelled_to_midi,
)
from .parser import ERROR, WARNING, Diagnostic

BEAT_TOLERANCE = 1e-6
HEADER_KEYS = ("matchFileVersion", "midiClockUnits", "midiClockRate")


class TimeMapError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class UnfoldGapError(ValueError):
    code = "unfold-gap"


def _line_no(line, index: int) -> int:
    return line.line_number if line.line_number is not None else index + 1


def _diag(severity, line, index, code, message) -> Diagnostic:
    return Diagnostic(severity, _line_no(line, index), 1, code, message)


# -- note mapping ------------------------------------------------------------


@dataclass(frozen=True)
class NoteMapping:
    """The note-level alignment: a partial function from performance notes
    to score anchors, plus the unmatched remainder on both sides."""

    matches: dict[int, Anchor] = field(default_factory=dict)
    insertions: frozenset[int] = frozenset()
    deletions: frozenset[Anchor] = frozenset()
    ornament_notes: dict[int, tuple[Anchor, str]] = field(default_factory=dict)

    @property
    def perf_ids(self) -> set[int]:
        return set(self.matches) | set(self.insertions) | set(self.ornament_notes)


def build_note_mapping(doc: MatchDocument) -> tuple[NoteMapping, list[Diagnostic]]:
    """Collect the alignment relations of a document.

    Performance ids must be unique across match/insertion/ornament lines
    and each score-note anchor may be consumed by at most one match or
    deletion; violations are reported, first occurrence wins.
    """
    diagnostics: list[Diagnostic] = []
    matches: dict[int, Anchor] = {}
    insertions: set[int] = set()
    deletions: set[Anchor] = set()
    ornaments: dict[int, tuple[Anchor, str]] = {}
    seen_perf: set[int] = set()
    seen_anchor: set[Anchor] = set()

    def claim_perf(pid: int, line, index) -> bool:
        if pid in seen_perf:
            diagnostics.append(
                _diag(ERROR, line, index, "duplicate-perf-note", f"performance note {pid} appears twice")
            )
            return False
        seen_perf.add(pid)
        return True

    def claim_anchor(anchor: Anchor, line, index) -> bool:
        if anchor in seen_anchor:
            diagnostics.append(
                _diag(ERROR, line, index, "duplicate-anchor", f"score note {anchor} consumed twice")
            )
            return False
        seen_anchor.add(anchor)
        return True

    for index, line in enumerate(doc.lines):
        if isinstance(line, NoteAlign):
            ok_p = claim_perf(line.perf.id, line, index)
            ok_a = claim_anchor(line.score.anchor, line, index)
            if ok_p and ok_a:
                matches[line.perf.id] = line.score.anchor
        elif isinstance(line, Insertion):
            if claim_perf(line.perf.id, line, index):
                insertions.add(line.perf.id)
        elif isinstance(line, Deletion):
            if claim_anchor(line.score.anchor, line, index):
                deletions.add(line.score.anchor)
        elif isinstance(line, OrnamentAlign):
            if claim_perf(line.perf.id, line, index):
                ornaments[line.perf.id] = (line.anchor, line.kind)

    mapping = NoteMapping(matches, frozenset(insertions), frozenset(deletions), ornaments)
    return mapping, diagnostics


# -- time map ----------------------------------------------------------------


@dataclass(frozen=True)
class TimeAnchor:
    beats: float
    tick: int
    kind: str                      # "beat" or "downbeat"
    alternates: tuple[int, ...] = ()  # further ticks from a reduced encoding


@dataclass(frozen=True)
class TimeMap:
    anchors: tuple[TimeAnchor, ...] = ()
    ticks_per_quarter: int | None = None
    microseconds_per_quarter: int | None = None
    issues: tuple[Diagnostic, ...] = ()
    beats_monotone: bool = True
    ticks_monotone: bool = True


def build_time_map(doc: MatchDocument) -> TimeMap:
    """Sample the score->performance time function from the stime lines.

    Anchors are sorted by score beats.  When a ptime carries several ticks
    the first one anchors the map and the rest are kept as alternates (a
    sign of a reduced, non-unfolded encoding), with a warning recorded.
    """
    issues: list[Diagnostic] = []
    anchors: list[TimeAnchor] = []
    for index, line in enumerate(doc.lines):
        if not isinstance(line, TimeAlign):
            continue
        if not line.ticks:
            issues.append(
                _diag(WARNING, line, index, "time-anchor-empty", "stime line carries no ticks")
            )
            continue
        if len(line.ticks) > 1:
            issues.append(
                _diag(
                    WARNING, line, index, "ptime-alternates",
                    f"ptime lists {len(line.ticks)} ticks; using the first, keeping alternates",
                )
            )
        anchors.append(
            TimeAnchor(line.point.onset_in_beats.value, line.ticks[0], line.kind, line.ticks[1:])
        )

    order = sorted(range(len(anchors)), key=lambda i: (anchors[i].beats, i))
    anchors = [anchors[i] for i in order]
    beats_monotone = all(
        anchors[i].beats < anchors[i + 1].beats for i in range(len(anchors) - 1)
    )
    ticks_monotone = all(
        anchors[i].tick < anchors[i + 1].tick for i in range(len(anchors) - 1)
    )
    if not beats_monotone or not ticks_monotone:
        what = "beats" if not beats_monotone else "ticks"
        issues.append(
            Diagnostic(ERROR, 1, 1, "time-map-nonmonotone", f"time anchors are not strictly increasing in {what}")
        )
    return TimeMap(
        anchors=tuple(anchors),
        ticks_per_quarter=doc.midi_clock_units,
        microseconds_per_quarter=doc.midi_clock_rate,
        issues=tuple(issues),
        beats_monotone=beats_monotone,
        ticks_monotone=ticks_monotone,
    )


def tick_to_seconds(tick: float, tm: TimeMap) -> float:
    """Physical time of a MIDI tick under the document's clock header."""
    tpq, uspq = tm.ticks_per_quarter, tm.microseconds_per_quarter
    if not tpq or tpq <= 0 or not uspq or uspq <= 0:
        raise TimeMapError("missing-header", "midiClockUnits/midiClockRate missing or not positive")
    return tick * uspq / (tpq * 1_000_000)


def _interpolate(x: float, xs: list[float], ys: list[float]) -> float:
    pos = bisect.bisect_left(xs, x)
    if pos < len(xs) and xs[pos] == x:
        return float(ys[pos])
    # clamp to the nearest segment; its slope also extrapolates
    lo = min(max(pos - 1, 0), len(xs) - 2)
    x0, x1 = xs[lo], xs[lo + 1]
    y0, y1 = ys[lo], ys[lo + 1]
    return y0 + (x - x0) * (y1 - y0) / (x1 - x0)


def score_to_perf(beats: float, tm: TimeMap) -> float:
    """Performance tick for a score-beat position (piecewise linear)."""
    if len(tm.anchors) < 2:
        raise TimeMapError("time-map-underdetermined", "need at least two time anchors")
    if not tm.beats_monotone:
        raise TimeMapError("time-map-nonmonotone", "anchor beats are not strictly increasing")
    xs = [a.beats for a in tm.anchors]
    ys = [float(a.tick) for a in tm.anchors]
    return _interpolate(beats, xs, ys)


def perf_to_score(tick: float, tm: TimeMap) -> float:
    """Score-beat position for a performance tick; inverse of score_to_perf."""
    if len(tm.anchors) < 2:
        raise TimeMapError("time-map-underdetermined", "need at least two time anchors")
    if not tm.ticks_monotone:
        raise TimeMapError("time-map-nonmonotone", "anchor ticks are not strictly increasing")
    xs = [float(a.tick) for a in tm.anchors]
    ys = [a.beats for a in tm.anchors]
    return _interpolate(tick, xs, ys)


@dataclass(frozen=True)
class TempoSegment:
    begin_beats: float
    end_beats: float
    bpm: float


def tempo_curve(tm: TimeMap) -> tuple[list[TempoSegment], list[Diagnostic]]:
    """Per-segment tempo between adjacent time anchors, in beats per minute."""
    segments: list[TempoSegment] = []
    diagnostics: list[Diagnostic] = []
    for a, b in zip(tm.anchors, tm.anchors[1:]):
        dt = tick_to_seconds(b.tick, tm) - tick_to_seconds(a.tick, tm)
        if dt <= 0:
            diagnostics.append(
                Diagnostic(
                    WARNING, 1, 1, "infinite-tempo",
                    f"zero time between beats {a.beats} and {b.beats}; segment skipped",
                )
            )
            continue
        segments.append(TempoSegment(a.beats, b.beats, 60.0 * (b.beats - a.beats) / dt))
    return segments, diagnostics


# -- unfolding ---------------------------------------------------------------


@dataclass(frozen=True)
class UnfoldMap:
    sections: tuple[Section, ...] = ()


def build_unfold_map(doc: MatchDocument) -> UnfoldMap:
    sections = [line for line in doc.lines if isinstance(line, Section)]
    sections.sort(key=lambda s: s.begin_unfolded.value)
    return UnfoldMap(tuple(sections))


def unfolded_to_original(beats: float, um: UnfoldMap) -> float:
    """Map an unfolded-score beat back to the original score.

    Sections are half-open intervals [begin, end); a beat outside all of
    them raises UnfoldGapError.
    """
    for s in um.sections:
        if s.begin_unfolded.value <= beats < s.end_unfolded.value:
            return s.begin_original.value + (beats - s.begin_unfolded.value)
    raise UnfoldGapError(f"beat {beats} is not covered by any section")


def original_to_unfolded(beats: float, um: UnfoldMap) -> list[float]:
    """All unfolded positions that play the given original-score beat."""
    results = []
    for s in um.sections:
        if s.begin_original.value <= beats < s.end_original.value:
            results.append(s.begin_unfolded.value + (beats - s.begin_original.value))
    return results


# -- validator ---------------------------------------------------------------


def _active_time_signatures(doc: MatchDocument) -> list[tuple[float, Fraction]]:
    sigs = []
    for line in doc.lines:
        if isinstance(line, ScoreProp) and line.key == "timeSignature" and isinstance(line.value, Fraction):
            sigs.append((line.onset_in_beats.value, line.value))
    sigs.sort(key=lambda item: item[0])
    return sigs


def _signature_at(sigs: list[tuple[float, Fraction]], beats: float) -> Fraction:
    active = sigs[0][1]
    for onset, sig in sigs:
        if onset <= beats + BEAT_TOLERANCE:
            active = sig
        else:
            break
    return active


def _recomputed_onset(point: ScoreTimePoint, sig: Fraction) -> float:
    beat_unit = Fraction(1, sig.denominator)
    return (
        (point.measure - 1) * sig.numerator
        + (point.beat - 1)
        + fraction_to_beats(point.offset, beat_unit)
    )


def validate(doc: MatchDocument) -> list[Diagnostic]:
    """Run every semantic check over a parsed document.

    Returns diagnostics ordered by (line, code); an empty list means the
    document is valid.  Field-range problems are errors, pitch mismatches
    between the spelled score note and the performed MIDI pitch are
    warnings (transposing instruments are not modelled).
    """
    diagnostics: list[Diagnostic] = []
    sigs = _active_time_signatures(doc)

    def check_perf_note(perf, line, index):
        if not 0 <= perf.midi_pitch <= 127:
            diagnostics.append(_diag(ERROR, line, index, "field-range", f"pitch {perf.midi_pitch} outside 0-127"))
        if not 0 <= perf.velocity <= 127:
            diagnostics.append(_diag(ERROR, line, index, "field-range", f"velocity {perf.velocity} outside 0-127"))
        if not 0 <= perf.channel <= 15:
            diagnostics.append(_diag(ERROR, line, index, "field-range", f"channel {perf.channel} outside 0-15"))
        if perf.onset_tick < 0 or perf.offset_tick < 0:
            diagnostics.append(_diag(ERROR, line, index, "field-range", "negative tick"))
        if perf.track < 0:
            diagnostics.append(_diag(ERROR, line, index, "field-range", f"negative track {perf.track}"))
        if perf.onset_tick > perf.offset_tick:
            diagnostics.append(
                _diag(ERROR, line, index, "tick-order",
                      f"note {perf.id} ends (tick {perf.offset_tick}) before it starts (tick {perf.onset_tick})")
            )

    def check_score_note(score, line, index):
        if score.position.measure < 0:
            diagnostics.append(_diag(ERROR, line, index, "field-range", f"negative measure {score.position.measure}"))
        if score.position.beat < 1:
            diagnostics.append(_diag(ERROR, line, index, "field-range", f"beat {score.position.beat} below 1"))
        try:
            spelled_to_midi(score.pitch)
        except ValueError as exc:
            diagnostics.append(_diag(ERROR, line, index, "pitch-range", str(exc)))
        if not sigs:
            return
        sig = _signature_at(sigs, score.position.onset_in_beats.value)
        recomputed = _recomputed_onset(score.position, sig)
        stored = score.position.onset_in_beats.value
        if abs(recomputed - stored) > BEAT_TOLERANCE:
            diagnostics.append(
                _diag(ERROR, line, index, "onset-inconsistent",
                      f"{score.anchor}: onset {stored} but {sig} meter implies {recomputed}")
            )
        exempt = score.duration.numerator == 0 or any(
            a in ("grace", "appoggiatura") for a in score.attributes
        )
        if not exempt:
            dur_beats = fraction_to_beats(score.duration, Fraction(1, sig.denominator))
            span = score.offset_in_beats.value - stored
            if abs(span - dur_beats) > BEAT_TOLERANCE:
                diagnostics.append(
                    _diag(ERROR, line, index, "duration-inconsistent",
                          f"{score.anchor}: duration {score.duration} is {dur_beats} beats but onsets span {span}")
                )

    info_seen: dict[str, int] = {}
    tick_dependent = False
    for index, line in enumerate(doc.lines):
        if isinstance(line, Info):
            info_seen[line.key] = info_seen.get(line.key, 0) + 1
            if info_seen[line.key] == 2:
                code = "duplicate-header" if line.key in HEADER_KEYS else "duplicate-info"
                severity = ERROR if line.key in HEADER_KEYS else WARNING
                diagnostics.append(_diag(severity, line, index, code, f"info key {line.key} repeats"))
        elif isinstance(line, ScoreProp):
            if line.measure < 0:
                diagnostics.append(_diag(ERROR, line, index, "field-range", f"negative measure {line.measure}"))
        elif isinstance(line, NoteAlign):
            tick_dependent = True
            check_score_note(line.score, line, index)
            check_perf_note(line.perf, line, index)
            try:
                expected = spelled_to_midi(line.score.pitch)
            except ValueError:
                expected = None
            if expected is not None and expected != line.perf.midi_pitch:
                diagnostics.append(
                    _diag(WARNING, line, index, "pitch-mismatch",
                          f"{line.score.anchor} spells MIDI {expected} but note {line.perf.id} plays {line.perf.midi_pitch}")
                )
        elif isinstance(line, Deletion):
            check_score_note(line.score, line, index)
        elif isinstance(line, (Insertion, OrnamentAlign)):
            tick_dependent = True
            check_perf_note(line.perf, line, index)
        elif isinstance(line, TimeAlign):
            tick_dependent = True
            if sigs:
                sig = _signature_at(sigs, line.point.onset_in_beats.value)
                recomputed = _recomputed_onset(line.point, sig)
                stored = line.point.onset_in_beats.value
                if abs(recomputed - stored) > BEAT_TOLERANCE:
                    diagnostics.append(
                        _diag(ERROR, line, index, "onset-inconsistent",
                              f"stime onset {stored} but {sig} meter implies {recomputed}")
                    )
        elif isinstance(line, Sustain):
            tick_dependent = True
            if line.tick < 0:
                diagnostics.append(_diag(ERROR, line, index, "field-range", "negative sustain tick"))
            if not 0 <= line.value <= 127:
                diagnostics.append(_diag(ERROR, line, index, "field-range", f"sustain value {line.value} outside 0-127"))
            if not 0 <= line.channel <= 15:
                diagnostics.append(_diag(ERROR, line, index, "field-range", f"channel {line.channel} outside 0-15"))

    for key in ("midiClockUnits", "midiClockRate"):
        raw = doc.info(key)
        if raw is not None and (doc._header_int(key) is None or doc._header_int(key) <= 0):
            diagnostics.append(Diagnostic(ERROR, 1, 1, "header-range", f"{key} must be a positive integer, found {raw!r}"))
    if tick_dependent and (doc.midi_clock_units is None or doc.midi_clock_rate is None):
        diagnostics.append(
            Diagnostic(ERROR, 1, 1, "missing-header",
                       "document has tick-timed lines but lacks midiClockUnits/midiClockRate")
        )

    _, mapping_diags = build_note_mapping(doc)
    diagnostics.extend(mapping_diags)
    diagnostics.extend(build_time_map(doc).issues)

    sections = build_unfold_map(doc).sections
    for index, s in enumerate(sections):
        len_unfolded = s.end_unfolded.value - s.begin_unfolded.value
        len_original = s.end_original.value - s.begin_original.value
        if abs(len_unfolded - len_original) > 1e-9:
            diagnostics.append(
                _diag(ERROR, s, index, "section-length",
                      f"section intervals differ in length ({len_unfolded} vs {len_original})")
            )
        if index:
            prev = sections[index - 1]
            if s.begin_unfolded.value < prev.end_unfolded.value - 1e-9:
                diagnostics.append(_diag(ERROR, s, index, "section-overlap", "unfolded sections overlap"))
            elif s.begin_unfolded.value > prev.end_unfolded.value + 1e-9:
                diagnostics.append(_diag(WARNING, s, index, "section-gap", "gap between unfolded sections"))

    diagnostics.sort(key=lambda d: (d.line_number, d.code, d.column, d.message))
    return diagnostics
