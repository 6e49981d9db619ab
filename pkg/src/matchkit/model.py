"""Domain types for match files: pitches, fractions, anchors, time points,
and the line/document structure shared by the parser, semantics, exporters
and the edit service.

All values are immutable after construction.  Parsing never normalizes
source text: fractions stay unreduced ("2/16" is not "1/8") and decimal
fields remember the exact source spelling, so a document can be serialized
back byte-identically.
"""

from __future__ import annotations

import decimal
import math
import re
from dataclasses import dataclass, field
from functools import total_ordering

STEPS = ("C", "D", "E", "F", "G", "A", "B")
STEP_SEMITONES = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}

# "" and "n" both mean natural; "x" is the double sharp.
MODIFIERS = ("", "n", "b", "#", "bb", "x")
MODIFIER_SHIFTS = {"": 0, "n": 0, "b": -1, "#": 1, "bb": -2, "x": 2}

TIME_POINT_KINDS = ("beat", "downbeat")
ORNAMENT_KINDS = ("ornament", "trill")

# Header keys that must appear at most once and carry positive integers.
HEADER_INFO_KEYS = ("matchFileVersion", "midiClockUnits", "midiClockRate")

_DECIMAL_RE = re.compile(r"-?\d+(\.\d+)?")


def format_decimal(value: float) -> str:
    """Canonical decimal spelling: minimal digits, at least one decimal place."""
    text = repr(float(value))
    if "e" in text or "E" in text:
        # repr uses exponent notation for extreme magnitudes; expand exactly
        text = format(decimal.Decimal(text), "f")
    if "." not in text:
        text += ".0"
    return text


@dataclass(frozen=True)
class DecimalValue:
    """A decimal field that remembers its source spelling ("1" stays "1")."""

    text: str
    value: float = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not _DECIMAL_RE.fullmatch(self.text):
            raise ValueError(f"not a decimal literal: {self.text!r}")
        object.__setattr__(self, "value", float(self.text))

    @classmethod
    def of(cls, value: float) -> "DecimalValue":
        return cls(format_decimal(value))

    def __str__(self) -> str:
        return self.text


@total_ordering
@dataclass(frozen=True, eq=False)
class Fraction:
    """A fraction of a whole note, kept unreduced exactly as written.

    Ordering and equality compare by cross-multiplication, so
    Fraction(1, 2) == Fraction(2, 4) even though they serialize
    differently.
    """

    numerator: int
    denominator: int
    text: str = ""

    def __post_init__(self):
        if self.denominator <= 0:
            raise ValueError(f"denominator must be positive: {self.denominator}")
        if not self.text:
            if self.denominator == 1:
                canonical = str(self.numerator)
            else:
                canonical = f"{self.numerator}/{self.denominator}"
            object.__setattr__(self, "text", canonical)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Fraction):
            return NotImplemented
        return self.numerator * other.denominator == other.numerator * self.denominator

    def __lt__(self, other) -> bool:
        if not isinstance(other, Fraction):
            return NotImplemented
        return self.numerator * other.denominator < other.numerator * self.denominator

    def __hash__(self) -> int:
        g = math.gcd(self.numerator, self.denominator) or 1
        return hash((self.numerator // g, self.denominator // g))

    def __float__(self) -> float:
        return self.numerator / self.denominator

    def __str__(self) -> str:
        return self.text


def fraction_to_beats(f: Fraction, beat_unit: Fraction) -> float:
    """Convert a whole-note fraction to beats under the given beat unit.

    The beat unit is the time-signature denominator as a whole-note
    fraction (1/4 for x/4 meters), so 1/8 under 4/4 is half a beat.
    """
    if beat_unit.numerator <= 0:
        raise ValueError("beat unit must be positive")
    return (f.numerator * beat_unit.denominator) / (f.denominator * beat_unit.numerator)


@dataclass(frozen=True)
class PitchSpelling:
    step: str      # one of C D E F G A B
    modifier: str  # one of "", n, b, #, bb, x
    octave: int    # scientific pitch notation, C4 = middle C


def spelled_to_midi(pitch: PitchSpelling) -> int:
    """MIDI note number for a spelled pitch; C4 maps to 60.

    Raises ValueError when the spelling is unknown or the result falls
    outside 0-127.
    """
    if pitch.step not in STEP_SEMITONES:
        raise ValueError(f"unknown step: {pitch.step!r}")
    if pitch.modifier not in MODIFIER_SHIFTS:
        raise ValueError(f"unknown modifier: {pitch.modifier!r}")
    midi = (pitch.octave + 1) * 12 + STEP_SEMITONES[pitch.step] + MODIFIER_SHIFTS[pitch.modifier]
    if not 0 <= midi <= 127:
        raise ValueError(f"pitch out of MIDI range: {pitch} -> {midi}")
    return midi


@dataclass(frozen=True)
class Anchor:
    """Score note identifier, optionally suffixed with a repetition instance."""

    base: str
    instance: int | None = None

    @property
    def text(self) -> str:
        if self.instance is None:
            return self.base
        return f"{self.base}-{self.instance}"

    def __str__(self) -> str:
        return self.text


def parse_anchor(text: str) -> Anchor:
    """Split a repetition suffix off an anchor token.

    Only the last "-" counts, and only when the suffix is a plain positive
    integer; anything else is part of the base ("x-y-3" has base "x-y").
    """
    if not text:
        raise ValueError("empty anchor")
    base, sep, suffix = text.rpartition("-")
    if sep and base and suffix.isascii() and suffix.isdigit():
        instance = int(suffix)
        # reject leading zeros and zero itself so text round-trips
        if instance > 0 and str(instance) == suffix:
            return Anchor(base, instance)
    return Anchor(text, None)


@dataclass(frozen=True)
class ScoreTimePoint:
    measure: int             # 1-based; 0 only for an anacrusis
    beat: int                # 1-based integer beat within the measure
    offset: Fraction         # offset from the beat, fraction of a whole note
    onset_in_beats: DecimalValue  # contiguous beat position


@dataclass(frozen=True)
class ScoreNote:
    anchor: Anchor
    pitch: PitchSpelling
    position: ScoreTimePoint
    duration: Fraction            # fraction of a whole note
    offset_in_beats: DecimalValue
    attributes: tuple[str, ...] = ()


@dataclass(frozen=True)
class PerfNote:
    id: int
    midi_pitch: int    # 0-127
    onset_tick: int    # MIDI tick of the note-on
    offset_tick: int   # MIDI tick of the note-off
    velocity: int      # 0-127
    channel: int       # 0-15
    track: int


@dataclass(frozen=True)
class Line:
    """Base for the typed line values; keeps the source line number when parsed."""

    line_number: int | None = field(default=None, compare=False, kw_only=True)


@dataclass(frozen=True)
class Info(Line):
    key: str
    value: str  # raw token text, spaces preserved


@dataclass(frozen=True)
class ScoreProp(Line):
    key: str
    value: "str | Fraction"  # timeSignature values parse as fractions
    measure: int
    onset_in_beats: DecimalValue


@dataclass(frozen=True)
class NoteAlign(Line):
    score: ScoreNote
    perf: PerfNote


@dataclass(frozen=True)
class Deletion(Line):
    score: ScoreNote


@dataclass(frozen=True)
class Insertion(Line):
    perf: PerfNote


@dataclass(frozen=True)
class OrnamentAlign(Line):
    anchor: Anchor
    perf: PerfNote
    kind: str  # "ornament" or "trill"


@dataclass(frozen=True)
class TimeAlign(Line):
    point: ScoreTimePoint
    kind: str               # "beat" or "downbeat"
    ticks: tuple[int, ...]  # performance ticks sampled at this score time


@dataclass(frozen=True)
class Section(Line):
    """Maps an unfolded-score beat interval onto its original-score interval."""

    begin_unfolded: DecimalValue
    end_unfolded: DecimalValue
    begin_original: DecimalValue
    end_original: DecimalValue
    directives: tuple[str, ...] = ()


@dataclass(frozen=True)
class Sustain(Line):
    tick: int
    value: int    # controller 64 value, 0-127
    channel: int
    track: int


@dataclass(frozen=True)
class Opaque(Line):
    """A line the lenient parser could not type; serialized back verbatim."""

    text: str


@dataclass(frozen=True)
class MatchDocument:
    """An ordered sequence of typed lines; the unit of parsing and editing."""

    lines: tuple[Line, ...] = ()

    def info(self, key: str) -> str | None:
        """First info value for `key`, stripped of surrounding spaces."""
        for line in self.lines:
            if isinstance(line, Info) and line.key == key:
                return line.value.strip()
        return None

    def _header_int(self, key: str) -> int | None:
        raw = self.info(key)
        if raw is None or not re.fullmatch(r"-?\d+", raw):
            return None
        return int(raw)

    @property
    def midi_clock_units(self) -> int | None:
        return self._header_int("midiClockUnits")

    @property
    def midi_clock_rate(self) -> int | None:
        return self._header_int("midiClockRate")

    def iter_perf_notes(self):
        """Yield (line, PerfNote) for every performance note in the document."""
        for line in self.lines:
            if isinstance(line, (NoteAlign, Insertion, OrnamentAlign)):
                yield line, line.perf

    def iter_score_notes(self):
        """Yield (line, ScoreNote) for every score note in the document."""
        for line in self.lines:
            if isinstance(line, (NoteAlign, Deletion)):
                yield line, line.score
