"""SVG alignment plot: a score lane in beats over a performance lane in
seconds, note rectangles, dotted connectors for matched notes, green
highlights around insertions and deletions, and grey gridlines at the
sampled time anchors.  Output is deterministic for a given document and
options."""

from __future__ import annotations

from dataclasses import dataclass

from ..model import Deletion, Insertion, MatchDocument, NoteAlign, TimeAlign, spelled_to_midi
from ..semantics import build_time_map, tick_to_seconds

_STYLE = (
    ".note{fill:#7a9cc6;stroke:#3d5a80;stroke-width:0.5}"
    ".note.performance{fill:#9fb8ad;stroke:#4a6d5d}"
    ".connector{stroke:#4477cc;stroke-width:1;stroke-dasharray:4,3}"
    ".unmatched{fill:none;stroke:#3fa34d;stroke-width:1.5}"
    ".gridline{stroke:#999999;stroke-width:0.75}"
    ".lane-label{font:12px sans-serif;fill:#333333}"
)


@dataclass(frozen=True)
class PlotOptions:
    width: float = 960.0
    lane_height: float = 220.0
    gap: float = 80.0       # vertical space the connectors cross
    margin: float = 40.0


def _fmt(value: float) -> str:
    return f"{value:.2f}"


class _Lane:
    def __init__(self, top: float, options: PlotOptions):
        self.top = top
        self.options = options
        self.notes: dict[str, tuple[float, float, int]] = {}  # id -> (t0, t1, pitch)

    def x_scale(self):
        times = [t for t0, t1, _ in self.notes.values() for t in (t0, t1)]
        lo = min(times, default=0.0)
        hi = max(times, default=1.0)
        span = hi - lo if hi > lo else 1.0
        usable = self.options.width - 2 * self.options.margin

        def to_x(t: float) -> float:
            return self.options.margin + (t - lo) * usable / span

        return to_x


def render_alignment_svg(doc: MatchDocument, options: PlotOptions | None = None) -> str:
    options = options or PlotOptions()
    score_lane = _Lane(options.margin, options)
    perf_top = options.margin + options.lane_height + options.gap
    perf_lane = _Lane(perf_top, options)

    tm = build_time_map(doc)
    has_clock = tm.ticks_per_quarter and tm.microseconds_per_quarter

    def perf_time(tick: int) -> float:
        # fall back to raw ticks when the clock header is absent
        return tick_to_seconds(tick, tm) if has_clock else float(tick)

    matches: list[tuple[str, str]] = []
    unmatched: list[tuple[_Lane, str]] = []
    pitches: list[int] = []

    for line in doc.lines:
        if isinstance(line, (NoteAlign, Deletion)):
            score = line.score
            try:
                pitch = spelled_to_midi(score.pitch)
            except ValueError:
                continue
            key = score.anchor.text
            score_lane.notes[key] = (
                score.position.onset_in_beats.value,
                score.offset_in_beats.value,
                pitch,
            )
            pitches.append(pitch)
            if isinstance(line, Deletion):
                unmatched.append((score_lane, key))
        if isinstance(line, NoteAlign) or isinstance(line, Insertion):
            perf = line.perf
            key = str(perf.id)
            perf_lane.notes[key] = (
                perf_time(perf.onset_tick),
                perf_time(perf.offset_tick),
                perf.midi_pitch,
            )
            pitches.append(perf.midi_pitch)
            if isinstance(line, NoteAlign):
                matches.append((line.score.anchor.text, key))
            else:
                unmatched.append((perf_lane, key))

    pitch_lo = min(pitches, default=60) - 2
    pitch_hi = max(pitches, default=72) + 2
    pitch_span = pitch_hi - pitch_lo
    note_height = max(options.lane_height / pitch_span, 2.0)

    def rect(lane: _Lane, key: str) -> tuple[float, float, float, float]:
        t0, t1, pitch = lane.notes[key]
        to_x = lane.x_scale()
        x = to_x(t0)
        w = max(to_x(t1) - x, 1.0)
        y = lane.top + (pitch_hi - pitch) * options.lane_height / pitch_span
        return x, y, w, note_height

    height = perf_top + options.lane_height + options.margin
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(options.width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(options.width)} {_fmt(height)}">',
        f"<style>{_STYLE}</style>",
        f'<text class="lane-label" x="{_fmt(options.margin)}" y="{_fmt(options.margin - 8)}">score (beats)</text>',
        f'<text class="lane-label" x="{_fmt(options.margin)}" y="{_fmt(perf_top - 8)}">'
        f'performance ({"seconds" if has_clock else "ticks"})</text>',
    ]

    perf_x = perf_lane.x_scale()
    for line in doc.lines:
        if isinstance(line, TimeAlign) and line.ticks:
            x = perf_x(perf_time(line.ticks[0]))
            parts.append(
                f'<line class="gridline" x1="{_fmt(x)}" y1="{_fmt(perf_top)}" '
                f'x2="{_fmt(x)}" y2="{_fmt(perf_top + options.lane_height)}"/>'
            )

    for lane, css in ((score_lane, "score"), (perf_lane, "performance")):
        for key in lane.notes:
            x, y, w, h = rect(lane, key)
            parts.append(
                f'<rect class="note {css}" x="{_fmt(x)}" y="{_fmt(y)}" '
                f'width="{_fmt(w)}" height="{_fmt(h)}"/>'
            )

    for anchor_key, perf_key in matches:
        sx, sy, sw, sh = rect(score_lane, anchor_key)
        px, py, pw, ph = rect(perf_lane, perf_key)
        parts.append(
            f'<line class="connector" x1="{_fmt(sx + sw / 2)}" y1="{_fmt(sy + sh)}" '
            f'x2="{_fmt(px + pw / 2)}" y2="{_fmt(py)}"/>'
        )

    for lane, key in unmatched:
        x, y, w, h = rect(lane, key)
        parts.append(
            f'<ellipse class="unmatched" cx="{_fmt(x + w / 2)}" cy="{_fmt(y + h / 2)}" '
            f'rx="{_fmt(w / 2 + 4)}" ry="{_fmt(h / 2 + 4)}"/>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
