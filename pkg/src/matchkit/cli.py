"""matchkit command line: a thin front end over the parser, semantics and
export modules, plus `serve` for the HTTP edit service.

Exit codes: 0 success, 1 validation/processing errors, 2 usage errors,
3 I/O errors.  Set MATCHKIT_LOG=debug|info|warning|error for logging.
"""

from __future__ import annotations

import json
import logging
import os
import sys
from pathlib import Path

import click

from . import semantics
from .export import (
    ExportError,
    note_array_to_csv,
    note_array_to_json,
    render_alignment_svg,
    to_midi,
    to_note_array,
    to_pianoroll,
)
from .model import (
    Deletion,
    Info,
    Insertion,
    NoteAlign,
    Opaque,
    OrnamentAlign,
    ScoreProp,
    Section,
    Sustain,
    TimeAlign,
)
from .parser import ERROR, LENIENT, STRICT, parse, serialize

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 3

log = logging.getLogger("matchkit")


class _IOFailure(click.ClickException):
    exit_code = EXIT_IO


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc


def _mode(strict: bool) -> str:
    return STRICT if strict else LENIENT


def _expand(paths: tuple[str, ...]) -> list[Path]:
    expanded: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            expanded.extend(sorted(p.rglob("*.match")))
        else:
            expanded.append(p)
    log.debug("expanded %d argument(s) to %d file(s)", len(paths), len(expanded))
    return expanded


@click.group()
@click.version_option(package_name="matchkit")
def main():
    level = os.environ.get("MATCHKIT_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


@main.command()
@click.argument("paths", nargs=-1, required=True, type=click.Path())
@click.option("--strict", is_flag=True, help="Reject any grammar deviation instead of repairing.")
@click.option("--json", "as_json", is_flag=True, help="Emit diagnostics as JSON.")
def validate(paths, strict, as_json):
    """Parse and semantically validate match files (directories recurse)."""
    had_error = False
    had_io_error = False
    report = []
    for path in _expand(paths):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            had_io_error = True
            if not as_json:
                click.echo(f"{path}: error reading file: {exc}", err=True)
            report.append({"path": str(path), "error": str(exc), "diagnostics": []})
            continue
        doc, diags = parse(text, _mode(strict))
        diags = diags + semantics.validate(doc)
        if any(d.severity == ERROR for d in diags):
            had_error = True
        report.append({"path": str(path), "diagnostics": [d.to_dict() for d in diags]})
        if not as_json:
            for d in diags:
                click.echo(f"{path}:{d.format()}")
    if as_json:
        click.echo(json.dumps({"files": report}, indent=2))
    if had_io_error:
        sys.exit(EXIT_IO)
    sys.exit(EXIT_INVALID if had_error else EXIT_OK)


def _stats(doc) -> dict:
    counts = {
        "info": 0, "scoreprop": 0, "note_alignments": 0, "insertions": 0,
        "deletions": 0, "ornaments": 0, "time_alignments": 0, "sections": 0,
        "sustains": 0, "opaque": 0,
    }
    keys = {
        Info: "info", ScoreProp: "scoreprop", NoteAlign: "note_alignments",
        Insertion: "insertions", Deletion: "deletions", OrnamentAlign: "ornaments",
        TimeAlign: "time_alignments", Section: "sections", Sustain: "sustains",
        Opaque: "opaque",
    }
    for line in doc.lines:
        key = keys.get(type(line))
        if key:
            counts[key] += 1

    mapping, _ = semantics.build_note_mapping(doc)
    beats = [s.position.onset_in_beats.value for _, s in doc.iter_score_notes()]
    beats += [s.offset_in_beats.value for _, s in doc.iter_score_notes()]
    ticks = [t for _, p in doc.iter_perf_notes() for t in (p.onset_tick, p.offset_tick)]

    tm = semantics.build_time_map(doc)
    mean_tempo = None
    if len(tm.anchors) >= 2 and tm.ticks_per_quarter and tm.microseconds_per_quarter:
        segments, _ = semantics.tempo_curve(tm)
        if segments:
            mean_tempo = sum(s.bpm for s in segments) / len(segments)

    return {
        "lines": counts,
        "matches": len(mapping.matches),
        "insertions": len(mapping.insertions),
        "deletions": len(mapping.deletions),
        "ornament_notes": len(mapping.ornament_notes),
        "beat_span": [min(beats), max(beats)] if beats else None,
        "tick_span": [min(ticks), max(ticks)] if ticks else None,
        "mean_tempo_bpm": mean_tempo,
    }


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--strict", is_flag=True)
@click.option("--json", "as_json", is_flag=True)
def stats(path, strict, as_json):
    """Summarize one match file: line census, alignment counts, spans, tempo."""
    doc, _ = parse(_read_text(Path(path)), _mode(strict))
    summary = _stats(doc)
    if as_json:
        click.echo(json.dumps(summary, indent=2))
        return
    for key, value in summary["lines"].items():
        click.echo(f"lines.{key}: {value}")
    for key in ("matches", "insertions", "deletions", "ornament_notes",
                "beat_span", "tick_span", "mean_tempo_bpm"):
        value = summary[key]
        if key == "mean_tempo_bpm" and value is not None:
            value = f"{value:.2f}"
        click.echo(f"{key}: {value}")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None,
              help="Destination ('-' for stdout); default rewrites in place.")
def fmt(path, out):
    """Canonically rewrite a match file (idempotent)."""
    doc, _ = parse(_read_text(Path(path)), LENIENT)
    text = serialize(doc)
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out or path).write_text(text, encoding="utf-8")


@main.command("to-midi")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None, help="Defaults to PATH with .mid suffix.")
@click.option("--multi-track", is_flag=True, help="Format 1, one track per track field.")
def to_midi_cmd(path, out, multi_track):
    """Export the performance as a Standard MIDI File (ticks preserved)."""
    source = Path(path)
    doc, _ = parse(_read_text(source), LENIENT)
    try:
        data = to_midi(doc, multi_track=multi_track)
    except ExportError as exc:
        raise click.ClickException(str(exc))
    target = Path(out) if out else source.with_suffix(".mid")
    target.write_bytes(data)
    click.echo(f"wrote {target}")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt_", type=click.Choice(["csv", "json"]), default="csv")
@click.option("--side", type=click.Choice(["score", "performance", "joined"]), default="joined")
@click.option("--pianoroll", is_flag=True, help="Emit a 128 x time-bins pianoroll matrix instead.")
@click.option("--resolution", type=float, default=None,
              help="Pianoroll bin width (seconds or beats, by side).")
@click.option("--out", type=click.Path(), default=None, help="Destination; default stdout.")
def export(path, fmt_, side, pianoroll, resolution, out):
    """Export note arrays (or a pianoroll) as CSV or JSON."""
    doc, _ = parse(_read_text(Path(path)), LENIENT)
    try:
        if pianoroll:
            roll_side = side if side != "joined" else "performance"
            roll = to_pianoroll(doc, roll_side, resolution=resolution)
            if fmt_ == "json":
                text = json.dumps(roll.tolist()) + "\n"
            else:
                text = "\n".join(",".join(str(v) for v in row) for row in roll) + "\n"
        else:
            rows = to_note_array(doc, side)
            text = note_array_to_csv(rows) if fmt_ == "csv" else note_array_to_json(rows)
    except (ExportError, semantics.TimeMapError) as exc:
        raise click.ClickException(str(exc))
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True)
def tempo(path, as_json):
    """Print the per-segment tempo curve between time anchors."""
    doc, _ = parse(_read_text(Path(path)), LENIENT)
    tm = semantics.build_time_map(doc)
    try:
        segments, diags = semantics.tempo_curve(tm)
    except semantics.TimeMapError as exc:
        raise click.ClickException(str(exc))
    if as_json:
        click.echo(json.dumps(
            [{"begin_beats": s.begin_beats, "end_beats": s.end_beats, "bpm": s.bpm} for s in segments],
            indent=2,
        ))
        return
    for d in diags:
        click.echo(d.format(), err=True)
    click.echo("begin_beats\tend_beats\tbpm")
    for s in segments:
        click.echo(f"{s.begin_beats:g}\t{s.end_beats:g}\t{s.bpm:.2f}")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--beats", type=float, default=None, help="Map one beat value instead of listing sections.")
@click.option("--direction", type=click.Choice(["to-original", "to-unfolded"]), default="to-original")
@click.option("--json", "as_json", is_flag=True)
def unfold(path, beats, direction, as_json):
    """Show repetition sections, or map a beat across the unfolding."""
    doc, _ = parse(_read_text(Path(path)), LENIENT)
    um = semantics.build_unfold_map(doc)
    if beats is None:
        rows = [
            {
                "begin_unfolded": s.begin_unfolded.value,
                "end_unfolded": s.end_unfolded.value,
                "begin_original": s.begin_original.value,
                "end_original": s.end_original.value,
                "directives": list(s.directives),
            }
            for s in um.sections
        ]
        if as_json:
            click.echo(json.dumps(rows, indent=2))
        else:
            for r in rows:
                click.echo(
                    f"[{r['begin_unfolded']:g},{r['end_unfolded']:g}) -> "
                    f"[{r['begin_original']:g},{r['end_original']:g}) {r['directives']}"
                )
        return
    try:
        if direction == "to-original":
            result = semantics.unfolded_to_original(beats, um)
        else:
            result = semantics.original_to_unfolded(beats, um)
    except semantics.UnfoldGapError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(result) if as_json else f"{result}")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None, help="Defaults to PATH with .svg suffix.")
def plot(path, out):
    """Render the alignment as an SVG plot."""
    source = Path(path)
    doc, _ = parse(_read_text(source), LENIENT)
    target = Path(out) if out else source.with_suffix(".svg")
    target.write_text(render_alignment_svg(doc), encoding="utf-8")
    click.echo(f"wrote {target}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@click.option("--state-dir", type=click.Path(file_okay=False), default=None,
              help="Persist document sessions to this directory.")
def serve(host, port, state_dir):
    """Run the HTTP edit service backing the alignment editor."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(state_dir=state_dir), host=host, port=port)


if __name__ == "__main__":
    main()
