// Explanation tree: depth-first ordering of the server's node rows and the
// clickable list rendering. Selection is purely client state; the server
// tree is never mutated from here.

import { escapeHtml } from "./planView.js";
import type { TreeDoc, TreeRow } from "./types.js";

export interface TreeEntry {
  row: TreeRow;
  depth: number;
}

/** Rows in depth-first order, children under their parent, stable within
 * siblings (the server lists nodes in creation order). */
export function treeEntries(tree: TreeDoc): TreeEntry[] {
  const children = new Map<string | null, TreeRow[]>();
  for (const row of tree.nodes) {
    const bucket = children.get(row.parent) ?? [];
    bucket.push(row);
    children.set(row.parent, bucket);
  }
  const out: TreeEntry[] = [];
  const walk = (parent: string | null, depth: number): void => {
    for (const row of children.get(parent) ?? []) {
      out.push({ row, depth });
      walk(row.id, depth + 1);
    }
  };
  walk(null, 0);
  return out;
}

export function renderTree(tree: TreeDoc, selected: string | null): string {
  const items = treeEntries(tree).map(({ row, depth }) => {
    const classes = ["tree-node", `status-${row.status}`];
    if (row.id === selected) {
      classes.push("selected");
    }
    const badges: string[] = [];
    if (row.cost !== null) {
      badges.push(`<span class="badge cost-badge">${escapeHtml(row.cost)}</span>`);
    }
    if (row.diffcost !== null) {
      badges.push(`<span class="badge diffcost-badge">+${escapeHtml(row.diffcost)}</span>`);
    }
    if (row.flagged) {
      badges.push(`<span class="badge warn-badge">redundancy</span>`);
    }
    const question = row.question === null
      ? `<span class="tree-question root-label">original plan</span>`
      : `<span class="tree-question">${escapeHtml(row.question)}</span>`;
    return `<li class="${classes.join(" ")}" data-node="${escapeHtml(row.id)}"`
      + ` style="--depth:${depth}">`
      + `<button type="button" class="tree-pick" data-node="${escapeHtml(row.id)}">`
      + `<span class="tree-id">${escapeHtml(row.id)}</span>`
      + `<span class="tree-status">${escapeHtml(row.status)}</span>`
      + badges.join("")
      + question
      + `</button></li>`;
  }).join("\n");
  return `<ul class="tree">${items}</ul>`;
}
