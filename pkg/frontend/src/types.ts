// Payload types for the matchkit edit service /v1 JSON API.

export interface Diagnostic {
  severity: "error" | "warning";
  line: number;
  column: number;
  code: string;
  message: string;
}

export interface CreateDocResponse {
  id: string;
  version: number;
  diagnostics: Diagnostic[];
}

export interface MatchPair {
  perf_id: number;
  anchor: string;
}

export interface OrnamentPair extends MatchPair {
  kind: "ornament" | "trill";
}

export interface ScoreNote {
  anchor: string;
  pitch: number | null;
  spelling: string;
  onset_beats: number;
  offset_beats: number;
  attributes: string[];
}

export interface PerfNote {
  id: number;
  pitch: number;
  onset_tick: number;
  offset_tick: number;
  velocity: number;
  channel: number;
  track: number;
  onset_seconds: number | null;
  offset_seconds: number | null;
}

export interface Alignment {
  version: number;
  matches: MatchPair[];
  insertions: number[];
  deletions: string[];
  ornaments: OrnamentPair[];
  score_notes: ScoreNote[];
  perf_notes: PerfNote[];
}

export interface TimeAnchor {
  beats: number;
  tick: number;
  kind: "beat" | "downbeat";
  seconds: number | null;
  alternates: number[];
}

export interface TimeMap {
  version: number;
  ticks_per_quarter: number | null;
  microseconds_per_quarter: number | null;
  anchors: TimeAnchor[];
}

export type EditKind = "set_match" | "set_insertion" | "set_deletion" | "clear";

export interface EditOp {
  kind: EditKind;
  perf_id?: number;
  anchor?: string;
}

export interface EditsResponse {
  version: number;
  diagnostics: Diagnostic[];
}
