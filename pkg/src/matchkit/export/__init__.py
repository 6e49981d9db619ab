from .notearray import NoteArrayRow, note_array_to_csv, note_array_to_json, to_note_array, to_pianoroll
from .smf import ExportError, to_midi
from .svg import PlotOptions, render_alignment_svg

__all__ = [
    "ExportError",
    "NoteArrayRow",
    "PlotOptions",
    "note_array_to_csv",
    "note_array_to_json",
    "render_alignment_svg",
    "to_midi",
    "to_note_array",
    "to_pianoroll",
]
