from collections import Counter

import pytest

from matchkit import (
    ERROR,
    LENIENT,
    STRICT,
    WARNING,
    Deletion,
    Info,
    Insertion,
    NoteAlign,
    Opaque,
    ScoreProp,
    Section,
    Sustain,
    TimeAlign,
    parse,
    parse_line,
    serialize,
    serialize_line,
    value_lexer,
)
from matchkit.model import Anchor, Fraction, PerfNote


def errors(diags):
    return [d for d in diags if d.severity == ERROR]


def warnings(diags):
    return [d for d in diags if d.severity == WARNING]


class TestValueLexer:
    def test_value_with_spaces_is_one_token(self):
        assert value_lexer("piece,Fugue 13 BWV858") == ["piece", "Fugue 13 BWV858"]

    def test_scoreprop_arity(self):
        assert value_lexer("timeSignature,4/4,1,0.0") == ["timeSignature", "4/4", "1", "0.0"]

    def test_bracket_awareness(self):
        assert value_lexer("a,[b,c],d") == ["a", "[b,c]", "d"]

    def test_paren_awareness(self):
        assert value_lexer("a,(b,c)") == ["a", "(b,c)"]

    def test_unbalanced_raises(self):
        with pytest.raises(ValueError):
            value_lexer("a,[b,c")
        with pytest.raises(ValueError):
            value_lexer("a,b]")


class TestParseLine:
    def test_info(self):
        line, diags = parse_line("info(midiClockUnits,480).", 1)
        assert line == Info("midiClockUnits", "480")
        assert diags == []

    def test_note_alignment(self):
        text = "snote(n0,[C,#],5,1:1,1/8,1/8,0.5,1.0,[])-note(0,73,1104,1647,43,0,0)."
        line, diags = parse_line(text, 1)
        assert isinstance(line, NoteAlign)
        assert diags == []
        s, p = line.score, line.perf
        assert s.anchor == Anchor("n0")
        assert (s.pitch.step, s.pitch.modifier, s.pitch.octave) == ("C", "#", 5)
        assert (s.position.measure, s.position.beat) == (1, 1)
        assert s.position.offset == Fraction(1, 8)
        assert s.duration == Fraction(1, 8)
        assert s.position.onset_in_beats.value == 0.5
        assert s.offset_in_beats.value == 1.0
        assert s.attributes == ()
        assert p == PerfNote(0, 73, 1104, 1647, 43, 0, 0)

    def test_time_alignment(self):
        line, diags = parse_line("stime(1:2,0,1,beat)-ptime([1620]).", 1)
        assert isinstance(line, TimeAlign)
        assert diags == []
        assert (line.point.measure, line.point.beat) == (1, 2)
        assert line.point.offset == Fraction(0, 1)
        assert line.point.onset_in_beats.value == 1.0
        assert line.kind == "beat"
        assert line.ticks == (1620,)

    def test_section_missing_dot_repaired(self):
        line, diags = parse_line("section(0.0,4.0,0.0,4.0,[])", 1)
        assert isinstance(line, Section)
        assert [d.code for d in warnings(diags)] == ["missing-dot"]
        assert line.begin_unfolded.value == 0.0 and line.end_original.value == 4.0

    def test_sustain(self):
        line, diags = parse_line("sustain(17140,31,0,0).", 1)
        assert line == Sustain(17140, 31, 0, 0)
        assert diags == []

    def test_sustain_short_form(self):
        line, diags = parse_line("sustain(17140,31).", 1)
        assert line == Sustain(17140, 31, 0, 0)
        assert [d.code for d in diags] == ["sustain-short"]

    def test_deletion(self):
        text = "snote(n9,[C,#],5,1:4,7/32,1/32,3.875,4.0,[])-deletion."
        line, diags = parse_line(text, 1)
        assert isinstance(line, Deletion)
        assert line.score.anchor == Anchor("n9")

    def test_insertion(self):
        line, diags = parse_line("insertion-note(7,75,3972,4084,58,0,0).", 1)
        assert isinstance(line, Insertion)
        assert line.perf.id == 7

    def test_ornament_and_trill(self):
        line, _ = parse_line("ornament(n5)-note(20,75,100,200,64,0,0).", 1)
        assert line.kind == "ornament" and line.anchor == Anchor("n5")
        line, _ = parse_line("trill(n5-2)-note(21,76,100,200,64,0,0).", 1)
        assert line.kind == "trill" and line.anchor == Anchor("n5", 2)

    def test_eight_field_note_strict_is_arity_error(self):
        text = "snote(n4,[E,#],5,1:3,1/8,1/16,2.5,2.75,[])-note(4,77,5,3217,3464,56,0,0)."
        line, diags = parse_line(text, 1, STRICT)
        assert line is None
        assert [d.code for d in errors(diags)] == ["arity"]

    def test_eight_field_note_lenient_repair_uses_score_pitch(self):
        text = "snote(n4,[E,#],5,1:3,1/8,1/16,2.5,2.75,[])-note(4,77,5,3217,3464,56,0,0)."
        line, diags = parse_line(text, 1, LENIENT)
        assert line.perf == PerfNote(4, 77, 3217, 3464, 56, 0, 0)
        assert [d.code for d in diags] == ["note-extra-field"]

    def test_duplicated_field_repair(self):
        line, diags = parse_line("insertion-note(10,73,4341,4425,4425,63,0,0).", 1)
        assert line.perf == PerfNote(10, 73, 4341, 4425, 63, 0, 0)
        assert [d.code for d in diags] == ["note-extra-field"]

    def test_run_on_tick_repair(self):
        line, diags = parse_line("insertion-note(8,74,41024186,61,0,0).", 1)
        assert line.perf == PerfNote(8, 74, 4102, 4186, 61, 0, 0)
        assert [d.code for d in diags] == ["note-run-on"]

    def test_ambiguous_repair_becomes_opaque(self):
        # two in-range candidates and no duplicate to break the tie
        text = "insertion-note(7,75,60,3972,4084,58,0,0)."
        line, diags = parse_line(text, 1, LENIENT)
        assert isinstance(line, Opaque)
        assert line.text == text
        assert len(warnings(diags)) == 1

    def test_unknown_head(self):
        line, diags = parse_line("wibble(1,2).", 3, STRICT)
        assert line is None
        assert diags[0].code == "unknown-line-kind"
        assert diags[0].line_number == 3

    def test_unknown_head_lenient_kept_verbatim(self):
        line, diags = parse_line("wibble(1,2).", 3, LENIENT)
        assert line == Opaque("wibble(1,2).")
        assert serialize_line(line) == "wibble(1,2)."

    def test_bad_number(self):
        line, diags = parse_line("sustain(a,31,0,0).", 1, STRICT)
        assert line is None
        assert diags[0].code == "bad-number"

    def test_out_of_range_velocity(self):
        text = "insertion-note(7,75,3972,4084,528,0,0)."
        line, diags = parse_line(text, 1, LENIENT)
        assert isinstance(line, Insertion) and line.perf.velocity == 528
        assert [d.code for d in diags] == ["field-range"]
        line, diags = parse_line(text, 1, STRICT)
        assert line is None
        assert [d.code for d in errors(diags)] == ["field-range"]

    def test_unbalanced_brackets(self):
        line, diags = parse_line("info(a,[b).", 1, STRICT)
        assert line is None and diags[0].code == "unbalanced"

    def test_blank_line(self):
        assert parse_line("   ", 1) == (None, [])


class TestParseDocument:
    def test_empty_document(self):
        doc, diags = parse("")
        assert doc.lines == () and diags == []

    def test_excerpt_line_census(self, bwv858):
        doc, diags = bwv858
        counts = Counter(type(line).__name__ for line in doc.lines)
        assert counts == {
            "Info": 5,
            "ScoreProp": 2,
            "NoteAlign": 9,
            "TimeAlign": 4,
            "Insertion": 4,
            "Deletion": 1,
            "Section": 1,
            "Sustain": 2,
        }
        assert len(warnings(diags)) >= 4
        assert errors(diags) == []

    def test_excerpt_strict_fails(self, bwv858_text):
        doc, diags = parse(bwv858_text, STRICT)
        assert len(errors(diags)) >= 4
        # every erroneous line is dropped, the rest parse
        non_blank = sum(1 for l in bwv858_text.splitlines() if l.strip())
        assert len(doc.lines) + len({d.line_number for d in errors(diags)}) == non_blank

    def test_fail_fast_stops_at_first_error(self, bwv858_text):
        doc, diags = parse(bwv858_text, STRICT, fail_fast=True)
        assert len(errors(diags)) == 1
        assert errors(diags)[0].line_number == 2

    def test_line_count_preservation_lenient(self, bwv858_text, bwv858_doc):
        non_blank = sum(1 for l in bwv858_text.splitlines() if l.strip())
        assert len(bwv858_doc.lines) == non_blank

    def test_diagnostics_point_at_retrievable_lines(self, bwv858_text, bwv858):
        source = bwv858_text.splitlines()
        for d in bwv858[1]:
            assert d.raw_line == source[d.line_number - 1]

    def test_info_value_spaces_survive(self):
        text = "info(matchFileVersion, 1.0.0).\n"
        doc, diags = parse(text, STRICT)
        assert errors(diags) == []
        assert doc.lines[0].value == " 1.0.0"
        assert doc.info("matchFileVersion") == "1.0.0"
        assert serialize(doc) == text

    def test_scoreprop_time_signature_typed(self):
        doc, _ = parse("scoreprop(timeSignature,4/4,1,0.0).\n")
        prop = doc.lines[0]
        assert isinstance(prop, ScoreProp)
        assert prop.value == Fraction(4, 4)

    def test_crlf_accepted_and_normalized_to_lf(self):
        doc, diags = parse("info(a,b).\r\ninfo(c,d).\r\n", STRICT)
        assert diags == []
        assert len(doc.lines) == 2
        assert serialize(doc) == "info(a,b).\ninfo(c,d).\n"


class TestSerialize:
    def test_blue_line_round_trips_byte_identical(self):
        text = "snote(n0,[C,#],5,1:1,1/8,1/8,0.5,1.0,[])-note(0,73,1104,1647,43,0,0).\n"
        doc, _ = parse(text, STRICT)
        assert serialize(doc) == text

    def test_empty_document(self):
        doc, _ = parse("")
        assert serialize(doc) == ""

    def test_canonical_repair_is_a_fixpoint(self, bwv858_doc, bwv858_canonical):
        doc2, diags2 = parse(bwv858_canonical, STRICT)
        assert errors(diags2) == []
        assert doc2 == bwv858_doc
        assert serialize(doc2) == bwv858_canonical

    def test_constructed_values_render_canonically(self):
        from matchkit.model import (
            Anchor,
            DecimalValue,
            Fraction,
            NoteAlign,
            PerfNote,
            PitchSpelling,
            ScoreNote,
            ScoreTimePoint,
        )

        score = ScoreNote(
            anchor=Anchor("n1"),
            pitch=PitchSpelling("C", "#", 5),
            position=ScoreTimePoint(1, 1, Fraction(1, 8), DecimalValue.of(0.5)),
            duration=Fraction(1, 8),
            offset_in_beats=DecimalValue.of(1.0),
        )
        line = NoteAlign(score, PerfNote(0, 73, 10, 20, 43, 0, 0))
        assert (
            serialize_line(line)
            == "snote(n1,[C,#],5,1:1,1/8,1/8,0.5,1.0,[])-note(0,73,10,20,43,0,0)."
        )

    def test_unreduced_fraction_survives(self):
        text = "snote(n0,[C,#],5,1:1,2/16,2/16,0.5,1.0,[])-note(0,73,1104,1647,43,0,0).\n"
        doc, _ = parse(text, STRICT)
        assert serialize(doc) == text

    def test_multi_tick_ptime_survives(self):
        text = "stime(1:2,0,1,beat)-ptime([1620,1750]).\n"
        doc, _ = parse(text, STRICT)
        assert serialize(doc) == text
