"""Line-oriented parser, diagnostics, and canonical serializer for match files.

A match file is a sequence of prolog-like terms, one per line, each ending
with a dot.  `parse` is pure: it returns a typed document plus diagnostics
and never raises on malformed input.  In lenient mode known deviations are
repaired (one warning per repair) and anything unparseable is kept verbatim
as an opaque line so the file still round-trips; in strict mode any
deviation is an error and the offending line is dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    MODIFIERS,
    ORNAMENT_KINDS,
    STEPS,
    TIME_POINT_KINDS,
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
    parse_anchor,
    spelled_to_midi,
)

STRICT = "strict"
LENIENT = "lenient"

ERROR = "error"
WARNING = "warning"

_INT_RE = re.compile(r"-?\d+")
_DECIMAL_RE = re.compile(r"-?\d+(\.\d+)?")
_FRACTION_RE = re.compile(r"(\d+)(?:/(\d+))?")
_MEASURE_BEAT_RE = re.compile(r"(\d+):(\d+)")
_TERM_RE = re.compile(r"([A-Za-z_]\w*)(?:\((.*)\))?", re.DOTALL)


@dataclass(frozen=True)
class Diagnostic:
    severity: str       # "error" or "warning"
    line_number: int    # 1-based
    column: int         # 1-based
    code: str
    message: str
    raw_line: str = ""

    def format(self) -> str:
        return f"{self.severity}:{self.line_number}:{self.column}:{self.code}:{self.message}"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "line": self.line_number,
            "column": self.column,
            "code": self.code,
            "message": self.message,
        }


class _LineError(Exception):
    """Structural problem that aborts parsing of a single line."""

    def __init__(self, code: str, message: str, column: int = 1):
        super().__init__(message)
        self.code = code
        self.message = message
        self.column = column


def value_lexer(raw_args: str) -> list[str]:
    """Split a term's argument text on top-level commas.

    Commas inside brackets or parentheses do not split, and tokens keep
    their interior spaces ("Fugue 13 BWV858" stays one token).  Raises
    ValueError on unbalanced brackets.
    """
    return [token for token, _ in _lex_with_offsets(raw_args)]


def _lex_with_offsets(raw_args: str) -> list[tuple[str, int]]:
    tokens = []
    depth = 0
    start = 0
    for i, ch in enumerate(raw_args):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ValueError(f"unbalanced bracket at position {i + 1}")
        elif ch == "," and depth == 0:
            tokens.append((raw_args[start:i], start))
            start = i + 1
    if depth != 0:
        raise ValueError("unbalanced bracket")
    tokens.append((raw_args[start:], start))
    return tokens


def _split_terms(body: str) -> list[tuple[str, int]]:
    """Split a line body on top-level dashes into (term text, offset) pairs."""
    parts = []
    depth = 0
    start = 0
    for i, ch in enumerate(body):
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth = max(depth - 1, 0)
        elif ch == "-" and depth == 0:
            parts.append((body[start:i], start))
            start = i + 1
    parts.append((body[start:], start))
    return parts


def _parse_term(text: str, offset: int) -> tuple[str, str | None, int]:
    """Return (name, args or None for a bare word, args offset)."""
    m = _TERM_RE.fullmatch(text.strip())
    if not m:
        raise _LineError("structure", f"malformed term: {text.strip()!r}", offset + 1)
    name, args = m.group(1), m.group(2)
    args_offset = offset + text.find("(") + 1 if args is not None else offset
    return name, args, args_offset


class _LineParser:
    """Parses one physical line; collects per-line diagnostics."""

    def __init__(self, raw: str, line_number: int, mode: str):
        self.raw = raw
        self.line_number = line_number
        self.mode = mode
        self.diagnostics: list[Diagnostic] = []

    def diag(self, severity: str, code: str, message: str, column: int = 1):
        self.diagnostics.append(
            Diagnostic(severity, self.line_number, column, code, message, self.raw)
        )

    def repair(self, code: str, message: str, column: int = 1):
        """Record a lenient repair; in strict mode the deviation is fatal."""
        if self.mode == STRICT:
            raise _LineError(code, message, column)
        self.diag(WARNING, code, message, column)

    def range_issue(self, message: str, column: int = 1):
        severity = ERROR if self.mode == STRICT else WARNING
        self.diag(severity, "field-range", message, column)

    # -- field helpers ----------------------------------------------------

    def _int(self, token: str, offset: int, what: str) -> int:
        tok = token.strip()
        if not _INT_RE.fullmatch(tok):
            raise _LineError("bad-number", f"{what} is not an integer: {tok!r}", offset + 1)
        return int(tok)

    def _decimal(self, token: str, offset: int, what: str) -> DecimalValue:
        tok = token.strip()
        if not _DECIMAL_RE.fullmatch(tok):
            raise _LineError("bad-number", f"{what} is not a decimal: {tok!r}", offset + 1)
        return DecimalValue(tok)

    def _fraction(self, token: str, offset: int, what: str) -> Fraction:
        tok = token.strip()
        m = _FRACTION_RE.fullmatch(tok)
        if not m:
            raise _LineError("bad-number", f"{what} is not a fraction: {tok!r}", offset + 1)
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise _LineError("bad-number", f"{what} has a zero denominator", offset + 1)
        return Fraction(num, den, tok)

    def _lex(self, args: str, offset: int) -> list[tuple[str, int]]:
        try:
            return [(tok, offset + pos) for tok, pos in _lex_with_offsets(args)]
        except ValueError as exc:
            raise _LineError("unbalanced", str(exc), offset + 1)

    def _args(self, args: str, offset: int, arity: int, what: str) -> list[tuple[str, int]]:
        tokens = self._lex(args, offset)
        if len(tokens) != arity:
            raise _LineError(
                "arity", f"{what} takes {arity} fields, found {len(tokens)}", offset + 1
            )
        return tokens

    def _bracket_list(self, token: str, offset: int, what: str) -> list[tuple[str, int]]:
        tok = token.strip()
        if not (tok.startswith("[") and tok.endswith("]")):
            raise _LineError("structure", f"{what} must be a [...] list: {tok!r}", offset + 1)
        inner = tok[1:-1]
        if inner == "":
            return []
        return self._lex(inner, offset + token.find("[") + 1)

    # -- term parsers ------------------------------------------------------

    def parse_score_note(self, args: str, offset: int) -> ScoreNote:
        toks = self._args(args, offset, 9, "snote")
        anchor_tok = toks[0][0].strip()
        if not anchor_tok:
            raise _LineError("structure", "empty anchor", toks[0][1] + 1)
        anchor = parse_anchor(anchor_tok)

        pitch_items = self._bracket_list(*toks[1], "pitch")
        if len(pitch_items) != 2:
            raise _LineError("arity", "pitch must be [NoteName,Mod]", toks[1][1] + 1)
        step = pitch_items[0][0].strip()
        modifier = pitch_items[1][0].strip()
        if step not in STEPS:
            raise _LineError("structure", f"unknown note name: {step!r}", pitch_items[0][1] + 1)
        if modifier not in MODIFIERS:
            raise _LineError("structure", f"unknown modifier: {modifier!r}", pitch_items[1][1] + 1)
        octave = self._int(*toks[2], "octave")

        mb = _MEASURE_BEAT_RE.fullmatch(toks[3][0].strip())
        if not mb:
            raise _LineError("bad-number", f"bad measure:beat: {toks[3][0].strip()!r}", toks[3][1] + 1)
        measure, beat = int(mb.group(1)), int(mb.group(2))
        if beat < 1:
            self.range_issue(f"beat must be >= 1, found {beat}", toks[3][1] + 1)

        offset_frac = self._fraction(*toks[4], "offset")
        duration = self._fraction(*toks[5], "duration")
        onset = self._decimal(*toks[6], "onset in beats")
        offset_beats = self._decimal(*toks[7], "offset in beats")
        attrs = tuple(t.strip() for t, _ in self._bracket_list(*toks[8], "attributes"))

        return ScoreNote(
            anchor=anchor,
            pitch=PitchSpelling(step, modifier, octave),
            position=ScoreTimePoint(measure, beat, offset_frac, onset),
            duration=duration,
            offset_in_beats=offset_beats,
            attributes=attrs,
        )

    def parse_perf_note(self, args: str, offset: int, expected_midi: int | None) -> PerfNote:
        tokens = self._lex(args, offset)
        values = []
        for tok, pos in tokens:
            values.append(self._int(tok, pos, "note field"))
        if len(values) != 7:
            # repairs are a lenient-mode privilege; strict fails on arity
            if self.mode == STRICT:
                raise _LineError("arity", f"note takes 7 fields, found {len(values)}", offset + 1)
            if len(values) == 8:
                values = self._repair_extra_field(values, tokens, expected_midi)
            elif len(values) == 6:
                values = self._repair_run_on(values, tokens, expected_midi)
            else:
                raise _LineError("arity", f"note takes 7 fields, found {len(values)}", offset + 1)
        note = PerfNote(*values)
        col = offset + 1
        if not 0 <= note.midi_pitch <= 127:
            self.range_issue(f"pitch {note.midi_pitch} outside 0-127", col)
        if note.onset_tick < 0 or note.offset_tick < 0:
            self.range_issue("negative tick", col)
        if not 0 <= note.velocity <= 127:
            self.range_issue(f"velocity {note.velocity} outside 0-127", col)
        if not 0 <= note.channel <= 15:
            self.range_issue(f"channel {note.channel} outside 0-15", col)
        if note.track < 0:
            self.range_issue(f"negative track {note.track}", col)
        return note

    @staticmethod
    def _note_candidate_ok(values: list[int], expected_midi: int | None) -> bool:
        """Plausibility of a repaired 7-field note: in range, note-off after
        note-on, ticks dominating the other fields, and (when the score half
        is known) the pitch the score implies."""
        nid, pitch, onset, offset, velocity, channel, track = values
        if not (0 <= pitch <= 127 and 0 <= velocity <= 127 and 0 <= channel <= 15):
            return False
        if onset < 0 or offset < onset or track < 0:
            return False
        if max(nid, pitch, velocity, channel, track) > min(onset, offset):
            return False
        if expected_midi is not None and pitch != expected_midi:
            return False
        return True

    def _repair_extra_field(self, values, tokens, expected_midi):
        candidates = {}
        for i in range(8):
            trial = values[:i] + values[i + 1:]
            if self._note_candidate_ok(trial, expected_midi):
                candidates[tuple(trial)] = i
        if len(candidates) > 1:
            # an adjacent duplicated value is the likeliest culprit
            for i in range(7):
                trial = values[:i] + values[i + 1:]
                if values[i] == values[i + 1] and tuple(trial) in candidates:
                    candidates = {tuple(trial): i}
                    break
        if len(candidates) != 1:
            raise _LineError("arity", "note has 8 fields and no unambiguous repair", tokens[0][1] + 1)
        repaired, dropped = candidates.popitem()
        self.repair(
            "note-extra-field",
            f"note has 8 fields; dropped surplus field {values[dropped]}",
            tokens[dropped][1] + 1,
        )
        return list(repaired)

    def _repair_run_on(self, values, tokens, expected_midi):
        candidates = {}
        for i, (tok, pos) in enumerate(tokens):
            tok = tok.strip()
            if len(tok) < 6 or len(tok) % 2 or not tok.isdigit():
                continue
            half = len(tok) // 2
            left, right = tok[:half], tok[half:]
            if right.startswith("0") and len(right) > 1:
                continue
            trial = values[:i] + [int(left), int(right)] + values[i + 1:]
            if self._note_candidate_ok(trial, expected_midi):
                candidates[tuple(trial)] = (i, pos)
        if len(candidates) != 1:
            raise _LineError("arity", "note takes 7 fields, found 6", tokens[0][1] + 1)
        repaired, (i, pos) = candidates.popitem()
        self.repair(
            "note-run-on",
            f"note has 6 fields; split run-on value {tokens[i][0].strip()} in two",
            pos + 1,
        )
        return list(repaired)

    def parse_time_point(self, args: str, offset: int) -> tuple[ScoreTimePoint, str]:
        toks = self._args(args, offset, 4, "stime")
        mb = _MEASURE_BEAT_RE.fullmatch(toks[0][0].strip())
        if not mb:
            raise _LineError("bad-number", f"bad measure:beat: {toks[0][0].strip()!r}", toks[0][1] + 1)
        offset_frac = self._fraction(*toks[1], "offset")
        onset = self._decimal(*toks[2], "onset in beats")
        kind = toks[3][0].strip()
        if kind not in TIME_POINT_KINDS:
            raise _LineError("structure", f"unknown time point kind: {kind!r}", toks[3][1] + 1)
        point = ScoreTimePoint(int(mb.group(1)), int(mb.group(2)), offset_frac, onset)
        return point, kind

    def parse_ticks(self, args: str, offset: int) -> tuple[int, ...]:
        tok = args.strip()
        if tok.startswith("[") and tok.endswith("]"):
            items = self._bracket_list(args, offset, "ptime")
        else:
            self.repair("ptime-unbracketed", "ptime value is not a [...] list", offset + 1)
            items = self._lex(args, offset)
        ticks = []
        for item, pos in items:
            ticks.append(self._int(item, pos, "tick"))
            if ticks[-1] < 0:
                self.range_issue(f"negative tick {ticks[-1]}", pos + 1)
        return tuple(ticks)

    # -- line dispatch -----------------------------------------------------

    def parse_body(self, body: str) -> Line:
        terms = _split_terms(body)
        if len(terms) > 2:
            raise _LineError("structure", "more than two dash-separated terms", terms[2][1] + 1)
        head, args, args_off = _parse_term(*terms[0])

        if len(terms) == 1:
            if head == "info":
                return self._info(args, args_off)
            if head == "scoreprop":
                return self._scoreprop(args, args_off)
            if head == "section":
                return self._section(args, args_off)
            if head == "sustain":
                return self._sustain(args, args_off)
            if head in ("snote", "stime", "insertion", "ornament", "trill"):
                raise _LineError("structure", f"{head} line is missing its second term", 1)
            raise _LineError("unknown-line-kind", f"unknown line kind: {head!r}", 1)

        tail, tail_args, tail_off = _parse_term(*terms[1])
        pair = (head, tail)
        if pair == ("snote", "note"):
            if args is None or tail_args is None:
                raise _LineError("structure", "snote-note line missing arguments", 1)
            score = self.parse_score_note(args, args_off)
            try:
                expected = spelled_to_midi(score.pitch)
            except ValueError:
                expected = None
            return NoteAlign(score, self.parse_perf_note(tail_args, tail_off, expected))
        if pair == ("snote", "deletion"):
            if args is None or tail_args is not None:
                raise _LineError("structure", "malformed deletion line", 1)
            return Deletion(self.parse_score_note(args, args_off))
        if pair == ("insertion", "note"):
            if args is not None or tail_args is None:
                raise _LineError("structure", "malformed insertion line", 1)
            return Insertion(self.parse_perf_note(tail_args, tail_off, None))
        if head in ORNAMENT_KINDS and tail == "note":
            if args is None or tail_args is None:
                raise _LineError("structure", f"malformed {head} line", 1)
            anchor_tok = args.strip()
            if not anchor_tok:
                raise _LineError("structure", "empty anchor", args_off + 1)
            note = self.parse_perf_note(tail_args, tail_off, None)
            return OrnamentAlign(parse_anchor(anchor_tok), note, head)
        if pair == ("stime", "ptime"):
            if args is None or tail_args is None:
                raise _LineError("structure", "malformed stime line", 1)
            point, kind = self.parse_time_point(args, args_off)
            return TimeAlign(point, kind, self.parse_ticks(tail_args, tail_off))
        raise _LineError("unknown-line-kind", f"unknown line kind: {head}-{tail}", 1)

    def _info(self, args: str | None, offset: int) -> Info:
        if args is None:
            raise _LineError("structure", "info line missing arguments", 1)
        toks = self._args(args, offset, 2, "info")
        key = toks[0][0].strip()
        if not key:
            raise _LineError("structure", "empty info key", toks[0][1] + 1)
        return Info(key, toks[1][0])

    def _scoreprop(self, args: str | None, offset: int) -> ScoreProp:
        if args is None:
            raise _LineError("structure", "scoreprop line missing arguments", 1)
        toks = self._args(args, offset, 4, "scoreprop")
        key = toks[0][0].strip()
        if not key:
            raise _LineError("structure", "empty scoreprop key", toks[0][1] + 1)
        value: str | Fraction
        if key == "timeSignature":
            value = self._fraction(*toks[1], "time signature")
            if value.numerator == 0:
                self.range_issue("time signature numerator is zero", toks[1][1] + 1)
        else:
            value = toks[1][0]
        measure = self._int(*toks[2], "measure")
        if measure < 0:
            self.range_issue(f"negative measure {measure}", toks[2][1] + 1)
        return ScoreProp(key, value, measure, self._decimal(*toks[3], "onset in beats"))

    def _section(self, args: str | None, offset: int) -> Section:
        if args is None:
            raise _LineError("structure", "section line missing arguments", 1)
        toks = self._args(args, offset, 5, "section")
        bounds = [self._decimal(*toks[i], "section bound") for i in range(4)]
        directives = tuple(t.strip() for t, _ in self._bracket_list(*toks[4], "directives"))
        return Section(*bounds, directives)

    def _sustain(self, args: str | None, offset: int) -> Sustain:
        if args is None:
            raise _LineError("structure", "sustain line missing arguments", 1)
        tokens = self._lex(args, offset)
        if len(tokens) == 2 and self.mode != STRICT:
            self.repair("sustain-short", "sustain has 2 fields; assuming channel 0, track 0", offset + 1)
            tokens = tokens + [("0", offset), ("0", offset)]
        if len(tokens) != 4:
            raise _LineError("arity", f"sustain takes 4 fields, found {len(tokens)}", offset + 1)
        tick = self._int(*tokens[0], "tick")
        value = self._int(*tokens[1], "value")
        channel = self._int(*tokens[2], "channel")
        track = self._int(*tokens[3], "track")
        if tick < 0:
            self.range_issue(f"negative tick {tick}", tokens[0][1] + 1)
        if not 0 <= value <= 127:
            self.range_issue(f"sustain value {value} outside 0-127", tokens[1][1] + 1)
        if not 0 <= channel <= 15:
            self.range_issue(f"channel {channel} outside 0-15", tokens[2][1] + 1)
        if track < 0:
            self.range_issue(f"negative track {track}", tokens[3][1] + 1)
        return Sustain(tick, value, channel, track)


def parse_line(text: str, line_number: int, mode: str = LENIENT) -> tuple[Line | None, list[Diagnostic]]:
    """Parse one physical line.

    Returns (line, diagnostics); the line is None when nothing could be
    kept (blank input, or an error in strict mode).  In lenient mode a line
    that cannot be typed is returned as Opaque so serialization keeps it.
    """
    stripped = text.strip()
    if not stripped:
        return None, []
    lp = _LineParser(text, line_number, mode)
    body = stripped
    try:
        if stripped.endswith("."):
            body = stripped[:-1]
        else:
            lp.repair("missing-dot", "line does not end with a dot", len(stripped) + 1)
        line = lp.parse_body(body)
    except _LineError as exc:
        if mode == STRICT:
            lp.diag(ERROR, exc.code, exc.message, exc.column)
            return None, lp.diagnostics
        lp.diag(WARNING, exc.code, exc.message + " (line kept verbatim)", exc.column)
        return Opaque(stripped, line_number=line_number), lp.diagnostics
    if mode == STRICT and any(d.severity == ERROR for d in lp.diagnostics):
        return None, lp.diagnostics
    return _with_line_number(line, line_number), lp.diagnostics


def _with_line_number(line: Line, line_number: int) -> Line:
    object.__setattr__(line, "line_number", line_number)
    return line


def parse(text: str, mode: str = LENIENT, fail_fast: bool = False) -> tuple[MatchDocument, list[Diagnostic]]:
    """Parse match file text into a document plus diagnostics.

    Source order is preserved and blank lines are skipped.  With
    fail_fast=True parsing stops at the first error-severity diagnostic
    and the document holds only the lines seen so far.
    """
    if mode not in (STRICT, LENIENT):
        raise ValueError(f"unknown parse mode: {mode!r}")
    lines: list[Line] = []
    diagnostics: list[Diagnostic] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line, diags = parse_line(raw, number, mode)
        diagnostics.extend(diags)
        if line is not None:
            lines.append(line)
        if fail_fast and any(d.severity == ERROR for d in diags):
            break
    return MatchDocument(tuple(lines)), diagnostics


# -- serialization ---------------------------------------------------------


def _render_score_note(s: ScoreNote) -> str:
    p = s.position
    return (
        f"snote({s.anchor},[{s.pitch.step},{s.pitch.modifier}],{s.pitch.octave},"
        f"{p.measure}:{p.beat},{p.offset},{s.duration},{p.onset_in_beats},"
        f"{s.offset_in_beats},[{','.join(s.attributes)}])"
    )


def _render_perf_note(n: PerfNote) -> str:
    return (
        f"note({n.id},{n.midi_pitch},{n.onset_tick},{n.offset_tick},"
        f"{n.velocity},{n.channel},{n.track})"
    )


def serialize_line(line: Line) -> str:
    if isinstance(line, Opaque):
        return line.text
    if isinstance(line, Info):
        return f"info({line.key},{line.value})."
    if isinstance(line, ScoreProp):
        return f"scoreprop({line.key},{line.value},{line.measure},{line.onset_in_beats})."
    if isinstance(line, NoteAlign):
        return f"{_render_score_note(line.score)}-{_render_perf_note(line.perf)}."
    if isinstance(line, Deletion):
        return f"{_render_score_note(line.score)}-deletion."
    if isinstance(line, Insertion):
        return f"insertion-{_render_perf_note(line.perf)}."
    if isinstance(line, OrnamentAlign):
        return f"{line.kind}({line.anchor})-{_render_perf_note(line.perf)}."
    if isinstance(line, TimeAlign):
        p = line.point
        ticks = ",".join(str(t) for t in line.ticks)
        return (
            f"stime({p.measure}:{p.beat},{p.offset},{p.onset_in_beats},{line.kind})"
            f"-ptime([{ticks}])."
        )
    if isinstance(line, Section):
        dirs = ",".join(line.directives)
        return (
            f"section({line.begin_unfolded},{line.end_unfolded},"
            f"{line.begin_original},{line.end_original},[{dirs}])."
        )
    if isinstance(line, Sustain):
        return f"sustain({line.tick},{line.value},{line.channel},{line.track})."
    raise TypeError(f"cannot serialize line of type {type(line).__name__}")


def serialize(doc: MatchDocument) -> str:
    """Render a document canonically: LF line endings, no spaces after
    commas in generated fields, every line dot-terminated, and a trailing
    newline when the document is non-empty.  Opaque lines are emitted
    verbatim; parsed source text inside values is preserved as written."""
    if not doc.lines:
        return ""
    return "\n".join(serialize_line(line) for line in doc.lines) + "\n"
