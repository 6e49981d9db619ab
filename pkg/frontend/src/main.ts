// Bootstrap: wire the editor state to the page, the toolbar, and the
// keyboard (L link, I insertion, D deletion, U undo).

import { MatchkitClient } from "./api.js";
import { EditorState } from "./state.js";
import { render } from "./render.js";

function query(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function download(name: string, text: string): void {
  const blob = new Blob([text], { type: "text/plain" });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = name;
  link.click();
  URL.revokeObjectURL(url);
}

export function bootstrap(): void {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "http://127.0.0.1:8000";
  const client = new MatchkitClient(base);
  const state = new EditorState(client);

  const canvas = query("canvas");
  const status = query("status");
  const counts = query("counts");

  state.onChange(() => {
    render(state, canvas);
    status.textContent = state.notice ?? "";
    const a = state.alignment;
    counts.textContent = a
      ? `${a.matches.length} matched / ${a.insertions.length} inserted / ` +
        `${a.deletions.length} deleted / v${a.version}` +
        (state.pendingCount() ? ` (${state.pendingCount()} pending)` : "")
      : "";
  });

  query("open").addEventListener("click", async () => {
    const text = (query("source") as HTMLTextAreaElement).value;
    try {
      const diagnostics = await state.open(text);
      state.notice = diagnostics.length
        ? `loaded with ${diagnostics.length} repair warning(s)`
        : "loaded";
    } catch (error) {
      state.notice = `could not load: ${error}`;
    }
    render(state, canvas);
    status.textContent = state.notice ?? "";
  });

  query("link").addEventListener("click", () => void state.link());
  query("insertion").addEventListener("click", () => void state.markInsertion());
  query("deletion").addEventListener("click", () => void state.markDeletion());
  query("undo").addEventListener("click", () => void state.undo());
  query("save").addEventListener("click", async () => {
    try {
      download("alignment.match", await state.save());
    } catch (error) {
      state.notice = `could not save: ${error}`;
    }
  });

  window.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLTextAreaElement) return;
    const key = event.key.toLowerCase();
    if (key === "l") void state.link();
    else if (key === "i") void state.markInsertion();
    else if (key === "d") void state.markDeletion();
    else if (key === "u") void state.undo();
  });
}

bootstrap();
