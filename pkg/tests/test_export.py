import csv
import io
import random
from collections import Counter

import numpy as np
import pytest

from matchkit import parse
from matchkit.export import (
    ExportError,
    note_array_to_csv,
    note_array_to_json,
    render_alignment_svg,
    to_midi,
    to_note_array,
    to_pianoroll,
)
from matchkit.model import Insertion, MatchDocument, PerfNote

from smfreader import read_smf

HEADER = "info(midiClockUnits,480).\ninfo(midiClockRate,500000).\n"


def perf_multiset(doc):
    return Counter(
        (p.midi_pitch, p.onset_tick, p.offset_tick, p.velocity)
        for _, p in doc.iter_perf_notes()
    )


class TestSmfExport:
    def test_excerpt_round_trips_through_independent_reader(self, bwv858_doc):
        decoded = read_smf(to_midi(bwv858_doc))
        assert decoded.format == 0
        assert decoded.division == 480
        assert decoded.tempos == [(0, 500000)]
        got = Counter((p, on, off, v) for p, on, off, v, _ch in decoded.notes)
        assert got == perf_multiset(bwv858_doc)
        assert len(decoded.notes) == 13
        assert decoded.controls == [(17140, 0, 64, 31), (17160, 0, 64, 49)]

    def test_every_tick_preserved_exactly(self, bwv858_doc):
        decoded = read_smf(to_midi(bwv858_doc))
        expected = {(p.onset_tick, p.offset_tick) for _, p in bwv858_doc.iter_perf_notes()}
        assert {(on, off) for _p, on, off, _v, _c in decoded.notes} == expected

    def test_empty_performance(self):
        doc, _ = parse(HEADER)
        decoded = read_smf(to_midi(doc))
        assert decoded.notes == [] and decoded.controls == []
        assert decoded.tempos == [(0, 500000)]

    def test_missing_header_is_an_error(self):
        doc, _ = parse("insertion-note(0,60,0,100,64,0,0).\n")
        with pytest.raises(ExportError):
            to_midi(doc)

    def test_multi_track_grouping(self):
        text = HEADER + (
            "insertion-note(0,60,0,100,64,0,0).\n"
            "insertion-note(1,62,50,150,64,0,1).\n"
        )
        doc, _ = parse(text)
        decoded = read_smf(to_midi(doc, multi_track=True))
        assert decoded.format == 1
        got = Counter((p, on, off, v) for p, on, off, v, _ in decoded.notes)
        assert got == perf_multiset(doc)

    def test_note_off_before_note_on_at_equal_tick(self):
        # same pitch retriggered back to back must not produce stuck notes
        text = HEADER + (
            "insertion-note(0,60,0,100,64,0,0).\n"
            "insertion-note(1,60,100,200,70,0,0).\n"
        )
        doc, _ = parse(text)
        decoded = read_smf(to_midi(doc))
        assert sorted(decoded.notes) == [(60, 0, 100, 64, 0), (60, 100, 200, 70, 0)]

    def test_byte_determinism(self, bwv858_doc):
        assert to_midi(bwv858_doc) == to_midi(bwv858_doc)

    def test_random_documents_round_trip(self):
        rng = random.Random(99)
        for _ in range(25):
            lines = [HEADER]
            for i in range(rng.randint(1, 40)):
                pitch = rng.randint(0, 127)
                onset = rng.randint(0, 100000)
                offset = onset + rng.randint(0, 5000)
                vel = rng.randint(1, 127)
                ch = rng.randint(0, 15)
                lines.append(f"insertion-note({i},{pitch},{onset},{offset},{vel},{ch},0).\n")
            doc, diags = parse("".join(lines))
            decoded = read_smf(to_midi(doc))
            got = Counter((p, on, off, v) for p, on, off, v, _ in decoded.notes)
            assert got == perf_multiset(doc)


class TestNoteArray:
    def test_joined_counts(self, bwv858_doc):
        rows = to_note_array(bwv858_doc, "joined")
        assert len(rows) == 9 + 4 + 1
        linked = [r for r in rows if r.side == "performance" and r.anchor_link]
        assert len(linked) == 9
        assert sum(1 for r in rows if r.side == "performance" and not r.anchor_link) == 4
        assert sum(1 for r in rows if r.side == "score") == 1

    def test_performance_row_for_first_note(self, bwv858_doc):
        rows = {r.id: r for r in to_note_array(bwv858_doc, "performance")}
        row = rows["0"]
        assert row.pitch == 73 and row.velocity == 43
        assert row.onset == pytest.approx(1.15, abs=1e-12)
        assert row.duration == pytest.approx((1647 - 1104) / 960, abs=1e-12)
        assert row.anchor_link == "n0"

    def test_score_rows(self, bwv858_doc):
        rows = to_note_array(bwv858_doc, "score")
        assert len(rows) == 10  # 9 matched + 1 deleted
        by_id = {r.id: r for r in rows}
        assert by_id["n0"].onset == 0.5 and by_id["n0"].duration == 0.5
        assert by_id["n9"].anchor_link is None
        assert by_id["n0"].anchor_link == "0"

    def test_empty_document(self):
        doc, _ = parse("")
        assert to_note_array(doc, "joined") == []

    def test_durations_are_non_negative(self, bwv858_doc):
        for side in ("score", "performance", "joined"):
            assert all(r.duration >= 0 for r in to_note_array(bwv858_doc, side))

    def test_csv_shape(self, bwv858_doc):
        text = note_array_to_csv(to_note_array(bwv858_doc, "joined"))
        parsed = list(csv.reader(io.StringIO(text)))
        assert parsed[0] == ["side", "id", "pitch", "onset", "duration", "velocity", "anchor_link"]
        assert len(parsed) == 15

    def test_json_round_trip(self, bwv858_doc):
        import json

        data = json.loads(note_array_to_json(to_note_array(bwv858_doc, "joined")))
        assert len(data) == 14
        assert {row["side"] for row in data} == {"performance", "score"}


class TestPianoroll:
    def test_performance_roll_shape_and_values(self, bwv858_doc):
        roll = to_pianoroll(bwv858_doc, "performance")
        assert roll.shape[0] == 128
        assert roll.min() >= 0 and roll.max() <= 127
        assert roll[73].max() == 63  # strongest C#5 strike (inserted note 10)

    def test_column_sums_invariant_under_note_order(self):
        text = HEADER + (
            "insertion-note(0,60,0,480,50,0,0).\n"
            "insertion-note(1,62,240,960,70,0,0).\n"
            "insertion-note(2,60,240,720,90,0,0).\n"
        )
        reversed_text = HEADER + "".join(
            line + "\n" for line in text[len(HEADER):].strip().split("\n")[::-1]
        )
        roll_a = to_pianoroll(parse(text)[0], "performance")
        roll_b = to_pianoroll(parse(reversed_text)[0], "performance")
        assert np.array_equal(roll_a.sum(axis=0), roll_b.sum(axis=0))
        assert np.array_equal(roll_a, roll_b)

    def test_score_roll_is_binary(self, bwv858_doc):
        roll = to_pianoroll(bwv858_doc, "score")
        assert set(np.unique(roll)) <= {0, 1}
        assert roll[73].any()  # C#5 appears in the score

    def test_resolution_scales_columns(self, bwv858_doc):
        fine = to_pianoroll(bwv858_doc, "performance", resolution=0.01)
        coarse = to_pianoroll(bwv858_doc, "performance", resolution=0.1)
        assert fine.shape[1] > coarse.shape[1]

    def test_zero_length_note_still_covers_a_bin(self):
        doc, _ = parse(HEADER + "insertion-note(0,60,480,480,50,0,0).\n")
        roll = to_pianoroll(doc, "performance")
        assert roll[60].max() == 50

    def test_empty(self):
        roll = to_pianoroll(parse("")[0], "performance")
        assert roll.shape == (128, 0)


class TestSvg:
    def test_excerpt_counts(self, bwv858_doc):
        svg = render_alignment_svg(bwv858_doc)
        assert svg.count('class="connector"') == 9
        assert svg.count('class="unmatched"') == 5
        assert svg.count('class="gridline"') == 4

    def test_no_gridlines_without_time_anchors(self):
        doc, _ = parse(HEADER + "insertion-note(0,60,0,100,64,0,0).\n")
        svg = render_alignment_svg(doc)
        assert 'class="gridline"' not in svg

    def test_deterministic(self, bwv858_doc):
        assert render_alignment_svg(bwv858_doc) == render_alignment_svg(bwv858_doc)

    def test_empty_document_renders(self):
        svg = render_alignment_svg(parse("")[0])
        assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")

    def test_tick_axis_fallback_without_header(self):
        doc = MatchDocument((Insertion(PerfNote(0, 60, 0, 100, 64, 0, 0)),))
        svg = render_alignment_svg(doc)
        assert "performance (ticks)" in svg
