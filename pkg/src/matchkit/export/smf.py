"""Standard MIDI File export.

Ticks are written exactly as stored in the document (no quantization):
the header division is midiClockUnits and a single set-tempo meta event
carries midiClockRate, so decoding the file recovers every onset and
offset tick bit for bit.
"""

from __future__ import annotations

import struct

from ..model import MatchDocument, Sustain

# sort ranks for simultaneous events: tempo first, note-offs before
# note-ons so equal-tick retriggers never produce stuck notes
_RANK_TEMPO = 0
_RANK_OFF = 1
_RANK_CONTROL = 2
_RANK_ON = 3

_SUSTAIN_CONTROLLER = 64


class ExportError(ValueError):
    pass


def _var_length(value: int) -> bytes:
    if value < 0:
        raise ExportError(f"negative delta time {value}")
    chunks = [value & 0x7F]
    value >>= 7
    while value:
        chunks.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(chunks))


def _check_range(what: str, value: int, lo: int, hi: int):
    if not lo <= value <= hi:
        raise ExportError(f"{what} {value} outside {lo}-{hi}")


def _gather_events(doc: MatchDocument) -> list[tuple]:
    """Every event as (tick, rank, channel, data1, seq, payload, track)."""
    events = []
    seq = 0
    for line, perf in doc.iter_perf_notes():
        _check_range("pitch", perf.midi_pitch, 0, 127)
        _check_range("velocity", perf.velocity, 0, 127)
        _check_range("channel", perf.channel, 0, 15)
        if perf.onset_tick < 0 or perf.offset_tick < perf.onset_tick:
            raise ExportError(f"note {perf.id} has bad ticks {perf.onset_tick}..{perf.offset_tick}")
        on = bytes((0x90 | perf.channel, perf.midi_pitch, perf.velocity))
        off = bytes((0x80 | perf.channel, perf.midi_pitch, 0))
        # a zero-length note keeps its off right after its own on; any
        # earlier rank would orphan the pair
        off_rank = _RANK_OFF if perf.offset_tick > perf.onset_tick else _RANK_ON
        events.append((perf.onset_tick, _RANK_ON, perf.channel, perf.midi_pitch, seq, on, perf.track))
        events.append((perf.offset_tick, off_rank, perf.channel, perf.midi_pitch, seq + 1, off, perf.track))
        seq += 2
    for line in doc.lines:
        if isinstance(line, Sustain):
            _check_range("sustain value", line.value, 0, 127)
            _check_range("channel", line.channel, 0, 15)
            if line.tick < 0:
                raise ExportError(f"negative sustain tick {line.tick}")
            payload = bytes((0xB0 | line.channel, _SUSTAIN_CONTROLLER, line.value))
            events.append((line.tick, _RANK_CONTROL, line.channel, _SUSTAIN_CONTROLLER, seq, payload, line.track))
            seq += 1
    return events


def _render_track(events: list) -> bytes:
    data = bytearray()
    previous = 0
    for tick, _rank, _ch, _d1, _seq, payload in events:
        data += _var_length(tick - previous)
        data += payload
        previous = tick
    data += _var_length(0) + b"\xff\x2f\x00"  # end of track
    return b"MTrk" + struct.pack(">I", len(data)) + bytes(data)


def to_midi(doc: MatchDocument, multi_track: bool = False) -> bytes:
    """Render the document's performance as SMF bytes.

    Format 0 by default; with multi_track=True a format 1 file is written
    with one track per distinct track field, the tempo meta going into the
    first track.  Requires the midiClockUnits/midiClockRate header.
    """
    division = doc.midi_clock_units
    tempo = doc.midi_clock_rate
    if division is None or tempo is None:
        raise ExportError("document lacks midiClockUnits/midiClockRate header")
    _check_range("midiClockUnits", division, 1, 0x7FFF)
    _check_range("midiClockRate", tempo, 1, 0xFFFFFF)

    tempo_event = (0, _RANK_TEMPO, 0, 0, -1, b"\xff\x51\x03" + tempo.to_bytes(3, "big"))
    raw = _gather_events(doc)

    if not multi_track:
        events = sorted([tempo_event] + [e[:6] for e in raw], key=lambda e: e[:5])
        tracks = [_render_track(events)]
        fmt = 0
    else:
        by_track: dict[int, list] = {}
        for *event, track in raw:
            by_track.setdefault(track, []).append(tuple(event))
        track_ids = sorted(by_track) or [0]
        by_track.setdefault(track_ids[0], []).append(tempo_event)
        tracks = [
            _render_track(sorted(by_track[t], key=lambda e: e[:5])) for t in track_ids
        ]
        fmt = 1

    header = struct.pack(">4sIHHH", b"MThd", 6, fmt, len(tracks), division)
    return header + b"".join(tracks)
