// Pure geometry for the two-lane alignment view: score lane in beats on
// top, performance lane in seconds below, connectors crossing the gap.

import type { Alignment, TimeMap } from "./types.js";
import type { LaneView } from "./state.js";

export interface LayoutOptions {
  width: number;
  laneHeight: number;
  gap: number;
  margin: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = {
  width: 1100,
  laneHeight: 240,
  gap: 90,
  margin: 48,
};

export interface NoteBox {
  key: string;               // anchor text or performance id as string
  side: "score" | "performance";
  x: number;
  y: number;
  width: number;
  height: number;
  unmatched: boolean;
  ornament: boolean;
  pitch: number;
}

export interface ConnectorLine {
  anchor: string;
  perfId: number;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GridLine {
  x: number;
  beats: number;
}

export interface Layout {
  boxes: NoteBox[];
  connectors: ConnectorLine[];
  gridlines: GridLine[];
  scoreTop: number;
  perfTop: number;
  height: number;
  perfUnit: "seconds" | "ticks";
}

const IDLE_VIEW: LaneView = { zoom: 1, pan: 0 };

function scaler(times: number[], opts: LayoutOptions, view: LaneView) {
  const lo = times.length ? Math.min(...times) : 0;
  const hi = times.length ? Math.max(...times) : 1;
  const span = hi > lo ? hi - lo : 1;
  const usable = opts.width - 2 * opts.margin;
  return (t: number) => opts.margin + (t - lo - view.pan) * (usable / span) * view.zoom;
}

export function computeLayout(
  alignment: Alignment,
  timemap: TimeMap | null,
  opts: LayoutOptions = DEFAULT_LAYOUT,
  scoreView: LaneView = IDLE_VIEW,
  perfView: LaneView = IDLE_VIEW,
): Layout {
  const scoreTop = opts.margin;
  const perfTop = opts.margin + opts.laneHeight + opts.gap;
  const height = perfTop + opts.laneHeight + opts.margin;

  const perfTime = (tick: number, seconds: number | null) => seconds ?? tick;
  const perfUnit: "seconds" | "ticks" =
    alignment.perf_notes.every((n) => n.onset_seconds !== null) ? "seconds" : "ticks";

  const pitches = [
    ...alignment.score_notes.map((n) => n.pitch).filter((p): p is number => p !== null),
    ...alignment.perf_notes.map((n) => n.pitch),
  ];
  const pitchLo = (pitches.length ? Math.min(...pitches) : 60) - 2;
  const pitchHi = (pitches.length ? Math.max(...pitches) : 72) + 2;
  const pitchSpan = pitchHi - pitchLo;
  const noteHeight = Math.max(opts.laneHeight / pitchSpan, 3);
  const pitchY = (laneTop: number, pitch: number) =>
    laneTop + ((pitchHi - pitch) * opts.laneHeight) / pitchSpan;

  const scoreX = scaler(
    alignment.score_notes.flatMap((n) => [n.onset_beats, n.offset_beats]),
    opts,
    scoreView,
  );
  const perfX = scaler(
    alignment.perf_notes.flatMap((n) => [
      perfTime(n.onset_tick, n.onset_seconds),
      perfTime(n.offset_tick, n.offset_seconds),
    ]),
    opts,
    perfView,
  );

  const deletions = new Set(alignment.deletions);
  const insertions = new Set(alignment.insertions);
  const ornaments = new Set(alignment.ornaments.map((o) => o.perf_id));

  const boxes: NoteBox[] = [];
  const byKey = new Map<string, NoteBox>();

  for (const note of alignment.score_notes) {
    if (note.pitch === null) continue;
    const x = scoreX(note.onset_beats);
    const box: NoteBox = {
      key: note.anchor,
      side: "score",
      x,
      y: pitchY(scoreTop, note.pitch),
      width: Math.max(scoreX(note.offset_beats) - x, 2),
      height: noteHeight,
      unmatched: deletions.has(note.anchor),
      ornament: false,
      pitch: note.pitch,
    };
    boxes.push(box);
    byKey.set(`score:${note.anchor}`, box);
  }
  for (const note of alignment.perf_notes) {
    const x = perfX(perfTime(note.onset_tick, note.onset_seconds));
    const box: NoteBox = {
      key: String(note.id),
      side: "performance",
      x,
      y: pitchY(perfTop, note.pitch),
      width: Math.max(perfX(perfTime(note.offset_tick, note.offset_seconds)) - x, 2),
      height: noteHeight,
      unmatched: insertions.has(note.id),
      ornament: ornaments.has(note.id),
      pitch: note.pitch,
    };
    boxes.push(box);
    byKey.set(`performance:${note.id}`, box);
  }

  const connectors: ConnectorLine[] = [];
  for (const pair of alignment.matches) {
    const scoreBox = byKey.get(`score:${pair.anchor}`);
    const perfBox = byKey.get(`performance:${pair.perf_id}`);
    if (!scoreBox || !perfBox) continue;
    connectors.push({
      anchor: pair.anchor,
      perfId: pair.perf_id,
      x1: scoreBox.x + scoreBox.width / 2,
      y1: scoreBox.y + scoreBox.height,
      x2: perfBox.x + perfBox.width / 2,
      y2: perfBox.y,
    });
  }

  const gridlines: GridLine[] = [];
  if (timemap) {
    for (const anchor of timemap.anchors) {
      gridlines.push({
        x: perfX(anchor.seconds ?? anchor.tick),
        beats: anchor.beats,
      });
    }
  }

  return { boxes, connectors, gridlines, scoreTop, perfTop, height, perfUnit };
}
