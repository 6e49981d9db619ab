// Shared test fixture: the alignment/timemap payloads the service serves
// for the annotated Bach excerpt (9 matches, 4 insertions, 1 deletion,
// 4 time anchors at 480 ticks per quarter, 500000 us per quarter).

import type { Alignment, TimeMap } from "./types.js";

const SCORE: Array<[string, number, number, number]> = [
  ["n0", 73, 0.5, 1.0],
  ["n1", 78, 1.0, 1.5],
  ["n2", 77, 1.5, 2.0],
  ["n3", 78, 2.0, 2.5],
  ["n4", 77, 2.5, 2.75],
  ["n5", 75, 2.75, 3.0],
  ["n7", 73, 3.0, 3.75],
  ["n8", 71, 3.75, 3.875],
  ["n9", 73, 3.875, 4.0],
  ["n17", 75, 4.0, 5.0],
];

const PERF: Array<[number, number, number, number, number]> = [
  [0, 73, 1104, 1647, 43],
  [1, 78, 1620, 2180, 51],
  [2, 77, 2160, 2727, 56],
  [3, 78, 2704, 3308, 55],
  [4, 77, 3217, 3464, 56],
  [5, 75, 3472, 3716, 55],
  [6, 73, 3716, 3949, 58],
  [7, 75, 3972, 4084, 58],
  [8, 74, 4102, 4186, 61],
  [9, 75, 4221, 4335, 54],
  [10, 73, 4341, 4425, 63],
  [11, 71, 4456, 4542, 55],
  [13, 75, 4752, 5808, 55],
];

const MATCHES: Array<[number, string]> = [
  [0, "n0"], [1, "n1"], [2, "n2"], [3, "n3"], [4, "n4"],
  [5, "n5"], [6, "n7"], [11, "n8"], [13, "n17"],
];

export function excerptAlignment(): Alignment {
  return {
    version: 1,
    matches: MATCHES.map(([perf_id, anchor]) => ({ perf_id, anchor })),
    insertions: [7, 8, 9, 10],
    deletions: ["n9"],
    ornaments: [],
    score_notes: SCORE.map(([anchor, pitch, onset_beats, offset_beats]) => ({
      anchor,
      pitch,
      spelling: "",
      onset_beats,
      offset_beats,
      attributes: [],
    })),
    perf_notes: PERF.map(([id, pitch, onset_tick, offset_tick, velocity]) => ({
      id,
      pitch,
      onset_tick,
      offset_tick,
      velocity,
      channel: 0,
      track: 0,
      onset_seconds: onset_tick / 960,
      offset_seconds: offset_tick / 960,
    })),
  };
}

export function excerptTimeMap(): TimeMap {
  return {
    version: 1,
    ticks_per_quarter: 480,
    microseconds_per_quarter: 500000,
    anchors: [1620, 2704, 3716, 4752].map((tick, i) => ({
      beats: i + 1,
      tick,
      kind: i === 3 ? "downbeat" : "beat",
      seconds: tick / 960,
      alternates: [],
    })),
  };
}
