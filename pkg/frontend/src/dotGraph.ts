// Minimal reader for the causal-diff DOT text the API serves. The server
// emits a fixed shape (quoted labels, optional color attributes), so a
// line parser is enough; no graph library is shipped.

import { escapeHtml } from "./planView.js";

export type DiffColor = "plain" | "red" | "blue";

export interface DotNode {
  label: string;
  color: DiffColor;
}

export interface DotEdge {
  from: string;
  to: string;
  label: string;
  color: DiffColor;
}

export interface DotGraph {
  nodes: DotNode[];
  edges: DotEdge[];
}

const QUOTED = /"((?:[^"\\]|\\.)*)"/g;

function unescape(raw: string): string {
  return raw.replace(/\\(.)/g, "$1");
}

function colorOf(line: string): DiffColor {
  if (line.includes("color=red")) {
    return "red";
  }
  if (line.includes("color=blue")) {
    return "blue";
  }
  return "plain";
}

export function parseDot(text: string): DotGraph {
  const nodes: DotNode[] = [];
  const edges: DotEdge[] = [];
  for (const rawLine of text.split("\n")) {
    const line = rawLine.trim();
    if (!line.endsWith(";") || line.startsWith("digraph")
        || line.startsWith("rankdir") || line.startsWith("node ")) {
      continue;
    }
    const quoted = [...line.matchAll(QUOTED)].map((m) => unescape(m[1] ?? ""));
    if (quoted.length === 0) {
      continue;
    }
    if (line.includes("->")) {
      edges.push({
        from: quoted[0] ?? "",
        to: quoted[1] ?? "",
        label: quoted[2] ?? "",
        color: colorOf(line),
      });
    } else {
      nodes.push({ label: quoted[0] ?? "", color: colorOf(line) });
    }
  }
  return { nodes, edges };
}

/** Added parts render red, removed blue, shared neutral, matching the
 * server's DOT colors. */
export function renderGraph(graph: DotGraph): string {
  const chipClass = (color: DiffColor): string =>
    color === "red" ? "chip chip-added"
      : color === "blue" ? "chip chip-removed" : "chip";
  const chips = new Map(graph.nodes.map((n) => [n.label, chipClass(n.color)]));
  const chip = (label: string): string =>
    `<span class="${chips.get(label) ?? "chip"}">${escapeHtml(label)}</span>`;

  const nodeRow = graph.nodes.map((n) => chip(n.label)).join(" ");
  const edgeRows = graph.edges.map((e) =>
    `<li class="edge edge-${e.color}">${chip(e.from)}`
    + `<span class="edge-atom">${escapeHtml(e.label)}</span>${chip(e.to)}</li>`)
    .join("\n");
  return `<div class="causal-graph">`
    + `<div class="graph-nodes">${nodeRow}</div>`
    + `<ul class="graph-edges">${edgeRows}</ul>`
    + `</div>`;
}
