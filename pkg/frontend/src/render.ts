// SVG rendering of the computed layout plus selection/error feedback.
// Full redraw on every state change; documents are desk-scale.

import { computeLayout, DEFAULT_LAYOUT, type LayoutOptions } from "./layout.js";
import type { EditorState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof SVGElementTagNameMap>(
  name: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

export function render(
  state: EditorState,
  container: HTMLElement,
  opts: LayoutOptions = DEFAULT_LAYOUT,
): void {
  container.replaceChildren();
  if (!state.alignment) return;
  const layout = computeLayout(
    state.alignment,
    state.timemap,
    opts,
    state.scoreView,
    state.perfView,
  );

  const svg = el("svg", {
    width: opts.width,
    height: layout.height,
    viewBox: `0 0 ${opts.width} ${layout.height}`,
  });

  const labels: Array<[string, number]> = [
    ["score (beats)", layout.scoreTop - 10],
    [`performance (${layout.perfUnit})`, layout.perfTop - 10],
  ];
  for (const [text, y] of labels) {
    const label = el("text", { x: opts.margin, y, class: "lane-label" });
    label.textContent = text;
    svg.appendChild(label);
  }

  for (const line of layout.gridlines) {
    svg.appendChild(
      el("line", {
        class: "gridline",
        x1: line.x,
        x2: line.x,
        y1: layout.perfTop,
        y2: layout.perfTop + opts.laneHeight,
      }),
    );
  }

  for (const connector of layout.connectors) {
    svg.appendChild(
      el("line", {
        class: "connector",
        x1: connector.x1,
        y1: connector.y1,
        x2: connector.x2,
        y2: connector.y2,
      }),
    );
  }

  const { perfId, anchor } = state.selection;
  const error = state.inlineError;
  for (const box of layout.boxes) {
    const classes = ["note", box.side];
    if (box.ornament) classes.push("ornament");
    if (
      (box.side === "performance" && perfId !== null && box.key === String(perfId)) ||
      (box.side === "score" && box.key === anchor)
    ) {
      classes.push("selected");
    }
    if (
      error &&
      ((box.side === "performance" && String(error.perfId) === box.key) ||
        (box.side === "score" && error.anchor === box.key))
    ) {
      classes.push("error");
    }
    const rect = el("rect", {
      class: classes.join(" "),
      x: box.x,
      y: box.y,
      width: box.width,
      height: box.height,
    });
    rect.addEventListener("click", () => {
      if (box.side === "performance") state.selectPerf(Number(box.key));
      else state.selectScore(box.key);
    });
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${box.side === "score" ? box.key : `note ${box.key}`} (pitch ${box.pitch})`;
    rect.appendChild(title);
    svg.appendChild(rect);

    if (box.unmatched) {
      svg.appendChild(
        el("ellipse", {
          class: "unmatched",
          cx: box.x + box.width / 2,
          cy: box.y + box.height / 2,
          rx: box.width / 2 + 5,
          ry: box.height / 2 + 5,
        }),
      );
    }
  }

  if (error) {
    const banner = el("text", {
      x: opts.margin,
      y: layout.height - 12,
      class: "error-label",
    });
    banner.textContent = error.message;
    svg.appendChild(banner);
  }

  container.appendChild(svg);
}
