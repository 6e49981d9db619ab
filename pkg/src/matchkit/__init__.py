"""matchkit: parse, validate, edit and export match alignment files."""

from .model import (
    Anchor,
    DecimalValue,
    Deletion,
    Fraction,
    Info,
    Insertion,
    Line,
    MatchDocument,
    NoteAlign,
    Opaque,
    OrnamentAlign,
    PerfNote,
    PitchSpelling,
    ScoreNote,
    ScoreProp,
    ScoreTimePoint,
    Section,
    Sustain,
    TimeAlign,
    format_decimal,
    fraction_to_beats,
    parse_anchor,
    spelled_to_midi,
)
from .parser import (
    ERROR,
    LENIENT,
    STRICT,
    WARNING,
    Diagnostic,
    parse,
    parse_line,
    serialize,
    serialize_line,
    value_lexer,
)
from .semantics import (
    NoteMapping,
    TempoSegment,
    TimeAnchor,
    TimeMap,
    TimeMapError,
    UnfoldGapError,
    UnfoldMap,
    build_note_mapping,
    build_time_map,
    build_unfold_map,
    original_to_unfolded,
    perf_to_score,
    score_to_perf,
    tempo_curve,
    tick_to_seconds,
    unfolded_to_original,
    validate,
)

__version__ = "1.0.0"
