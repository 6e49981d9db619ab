// Editor state: one loaded document session, a two-sided selection, an
// optimistic pending-ops queue, and the same partition rule the service
// enforces, applied before any request leaves the browser.

import { ApiError } from "./api.js";
import type {
  Alignment,
  CreateDocResponse,
  Diagnostic,
  EditOp,
  EditsResponse,
  TimeMap,
} from "./types.js";

/** The slice of the API client the editor needs; MatchkitClient satisfies it. */
export interface EditClient {
  createDoc(text: string): Promise<CreateDocResponse>;
  getAlignment(docId: string): Promise<Alignment>;
  getTimeMap(docId: string): Promise<TimeMap>;
  getFile(docId: string): Promise<string>;
  postEdits(docId: string, baseVersion: number, ops: EditOp[]): Promise<EditsResponse>;
  undo(docId: string): Promise<EditsResponse>;
}

export interface Selection {
  perfId: number | null;
  anchor: string | null;
}

export interface LaneView {
  zoom: number; // 1 = fit width
  pan: number;  // time units (beats or seconds) scrolled off the left edge
}

export interface InlineError {
  perfId?: number;
  anchor?: string;
  message: string;
}

type Listener = () => void;

export class EditorState {
  docId: string | null = null;
  alignment: Alignment | null = null;
  timemap: TimeMap | null = null;
  selection: Selection = { perfId: null, anchor: null };
  scoreView: LaneView = { zoom: 1, pan: 0 };
  perfView: LaneView = { zoom: 1, pan: 0 };
  notice: string | null = null;
  inlineError: InlineError | null = null;

  private pending: EditOp[] = [];
  private inflight = false;
  private listeners: Listener[] = [];

  constructor(private client: EditClient) {}

  onChange(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  pendingCount(): number {
    return this.pending.length + (this.inflight ? 1 : 0);
  }

  async open(text: string): Promise<Diagnostic[]> {
    const created = await this.client.createDoc(text);
    await this.load(created.id);
    return created.diagnostics;
  }

  async load(docId: string): Promise<void> {
    this.docId = docId;
    await this.refetch();
    this.selection = { perfId: null, anchor: null };
    this.notice = null;
    this.inlineError = null;
    this.emit();
  }

  async refetch(): Promise<void> {
    if (!this.docId) return;
    this.alignment = await this.client.getAlignment(this.docId);
    this.timemap = await this.client.getTimeMap(this.docId);
    this.pruneSelection();
    this.emit();
  }

  // -- derived lookups -------------------------------------------------

  perfState(perfId: number): "matched" | "insertion" | "ornament" | null {
    const a = this.alignment;
    if (!a) return null;
    if (a.matches.some((m) => m.perf_id === perfId)) return "matched";
    if (a.insertions.includes(perfId)) return "insertion";
    if (a.ornaments.some((o) => o.perf_id === perfId)) return "ornament";
    return null;
  }

  anchorState(anchor: string): "matched" | "deletion" | null {
    const a = this.alignment;
    if (!a) return null;
    if (a.matches.some((m) => m.anchor === anchor)) return "matched";
    if (a.deletions.includes(anchor)) return "deletion";
    return null;
  }

  matchOf(perfId: number): string | null {
    return this.alignment?.matches.find((m) => m.perf_id === perfId)?.anchor ?? null;
  }

  // -- selection --------------------------------------------------------

  selectPerf(perfId: number): void {
    if (this.perfState(perfId) === null) return;
    this.selection.perfId = this.selection.perfId === perfId ? null : perfId;
    this.emit();
  }

  selectScore(anchor: string): void {
    if (this.anchorState(anchor) === null) return;
    this.selection.anchor = this.selection.anchor === anchor ? null : anchor;
    this.emit();
  }

  private pruneSelection(): void {
    if (this.selection.perfId !== null && this.perfState(this.selection.perfId) === null) {
      this.selection.perfId = null;
    }
    if (this.selection.anchor !== null && this.anchorState(this.selection.anchor) === null) {
      this.selection.anchor = null;
    }
  }

  // -- partition pre-validation (mirror of the service rule) ------------

  validateOp(op: EditOp): string | null {
    if (!this.alignment) return "no document loaded";
    if (op.kind === "set_match") {
      if (op.perf_id === undefined || !op.anchor) return "link needs one note on each side";
      const perf = this.perfState(op.perf_id);
      if (perf === null) return `no performance note ${op.perf_id}`;
      if (perf === "ornament") return `note ${op.perf_id} belongs to an ornament line`;
      const anchor = this.anchorState(op.anchor);
      if (anchor === null) return `no score note ${op.anchor}`;
      if (anchor === "matched" && this.matchOf(op.perf_id) !== op.anchor) {
        return `${op.anchor} is already matched`;
      }
      return null;
    }
    if (op.kind === "set_insertion") {
      if (op.perf_id === undefined) return "needs a performance note";
      const perf = this.perfState(op.perf_id);
      if (perf === null) return `no performance note ${op.perf_id}`;
      if (perf === "ornament") return `note ${op.perf_id} belongs to an ornament line`;
      return null;
    }
    if (op.kind === "set_deletion") {
      if (!op.anchor) return "needs a score note";
      if (this.anchorState(op.anchor) === null) return `no score note ${op.anchor}`;
      return null;
    }
    if (op.kind === "clear") {
      if ((op.perf_id === undefined) === (op.anchor === undefined)) {
        return "clear needs exactly one side";
      }
      return this.validateOp(
        op.perf_id !== undefined
          ? { kind: "set_insertion", perf_id: op.perf_id }
          : { kind: "set_deletion", anchor: op.anchor },
      );
    }
    return `unknown op ${op.kind}`;
  }

  // -- edit actions ------------------------------------------------------

  async link(): Promise<void> {
    const { perfId, anchor } = this.selection;
    if (perfId === null || anchor === null) {
      this.notice = "select one performance note and one score note to link";
      this.emit();
      return;
    }
    await this.submit({ kind: "set_match", perf_id: perfId, anchor });
  }

  async markInsertion(): Promise<void> {
    if (this.selection.perfId === null) {
      this.notice = "select a performance note first";
      this.emit();
      return;
    }
    await this.submit({ kind: "set_insertion", perf_id: this.selection.perfId });
  }

  async markDeletion(): Promise<void> {
    if (this.selection.anchor === null) {
      this.notice = "select a score note first";
      this.emit();
      return;
    }
    await this.submit({ kind: "set_deletion", anchor: this.selection.anchor });
  }

  async undo(): Promise<void> {
    if (!this.docId) return;
    try {
      await this.client.undo(this.docId);
    } catch (error) {
      this.notice = error instanceof ApiError ? error.message : String(error);
    }
    await this.refetch();
  }

  async save(): Promise<string> {
    if (!this.docId) throw new Error("no document loaded");
    return this.client.getFile(this.docId);
  }

  // -- optimistic submission --------------------------------------------

  private async submit(op: EditOp): Promise<void> {
    const problem = this.validateOp(op);
    if (problem) {
      this.inlineError = { perfId: op.perf_id, anchor: op.anchor, message: problem };
      this.emit();
      return;
    }
    this.inlineError = null;
    this.applyLocal(op);
    this.emit();
    if (this.inflight) {
      this.pending.push(op);
      return;
    }
    await this.flush([op]);
  }

  private async flush(ops: EditOp[]): Promise<void> {
    if (!this.docId || !this.alignment) return;
    this.inflight = true;
    try {
      await this.client.postEdits(this.docId, this.alignment.version, ops);
      this.inflight = false;
      await this.refetch();
      const queued = this.pending;
      this.pending = [];
      if (queued.length) await this.flush(queued);
    } catch (error) {
      this.inflight = false;
      this.pending = [];
      if (error instanceof ApiError && error.status === 409) {
        this.notice = "document changed elsewhere; reloaded, nothing replayed";
      } else if (error instanceof ApiError && error.status === 422) {
        const op = ops[ops.length - 1];
        this.inlineError = { perfId: op.perf_id, anchor: op.anchor, message: error.message };
      } else {
        this.notice = error instanceof ApiError ? error.message : String(error);
      }
      await this.refetch(); // rollback: the server state is the truth
    }
  }

  // Mutate a copied alignment so the view reacts before the server confirms.
  private applyLocal(op: EditOp): void {
    if (!this.alignment) return;
    const a: Alignment = JSON.parse(JSON.stringify(this.alignment));
    const unlinkPerf = (perfId: number) => {
      const pair = a.matches.find((m) => m.perf_id === perfId);
      if (!pair) return;
      a.matches = a.matches.filter((m) => m.perf_id !== perfId);
      a.insertions = [...a.insertions, perfId].sort((x, y) => x - y);
      a.deletions = [...a.deletions, pair.anchor].sort();
    };
    const unlinkAnchor = (anchor: string) => {
      const pair = a.matches.find((m) => m.anchor === anchor);
      if (pair) unlinkPerf(pair.perf_id);
    };
    if (op.kind === "set_match" && op.perf_id !== undefined && op.anchor) {
      unlinkPerf(op.perf_id);
      a.insertions = a.insertions.filter((id) => id !== op.perf_id);
      a.deletions = a.deletions.filter((an) => an !== op.anchor);
      a.matches = [...a.matches, { perf_id: op.perf_id, anchor: op.anchor }].sort(
        (x, y) => x.perf_id - y.perf_id,
      );
    } else if (op.kind === "set_insertion" && op.perf_id !== undefined) {
      unlinkPerf(op.perf_id);
    } else if (op.kind === "set_deletion" && op.anchor) {
      unlinkAnchor(op.anchor);
    } else if (op.kind === "clear") {
      if (op.perf_id !== undefined) unlinkPerf(op.perf_id);
      else if (op.anchor) unlinkAnchor(op.anchor);
    }
    this.alignment = a;
  }
}
