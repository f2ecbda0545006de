// Plan table and diff view. Rows are assembled straight from API documents:
// the three diff buckets are the server's comparison verbatim, never a
// client-side recomputation. Numbers are kept as their decimal strings;
// floats appear only to size duration bars and order rows.

import type { ExplanationDoc, NodeDoc, PlanDoc, StepDoc } from "./types.js";

export type Bucket = "plain" | "existing" | "removed" | "added";

export interface PlanRow {
  time: string;
  action: string;
  duration: string;
  end: string;
  bucket: Bucket;
  redundant: boolean;
}

function stepKey(step: StepDoc): string {
  return `${step.time}|${step.action}|${step.duration}`;
}

function toRow(step: StepDoc, bucket: Bucket, redundant: Set<string>): PlanRow {
  return {
    time: step.time,
    action: step.action,
    duration: step.duration,
    end: step.end,
    bucket,
    redundant: redundant.has(stepKey(step)),
  };
}

function byStartTime(a: PlanRow, b: PlanRow): number {
  return parseFloat(a.time) - parseFloat(b.time);
}

function redundantKeys(node: NodeDoc): Set<string> {
  const keys = new Set<string>();
  const steps = node.plan?.steps ?? [];
  for (const index of node.explanation?.redundant_steps ?? []) {
    const step = steps[index];
    if (step !== undefined) {
      keys.add(stepKey(step));
    }
  }
  return keys;
}

/** Rows for a node without a comparison (the root, or a plain plan). */
export function planRows(plan: PlanDoc): PlanRow[] {
  const none = new Set<string>();
  return plan.steps.map((s) => toRow(s, "plain", none)).sort(byStartTime);
}

/** Rows for a node's diff view: the server's three buckets, merged and
 * sorted. Removed steps belong to the parent plan, the rest to this one. */
export function diffRows(node: NodeDoc): PlanRow[] {
  const ex = node.explanation;
  if (ex === null) {
    return node.plan === null ? [] : planRows(node.plan);
  }
  const redundant = redundantKeys(node);
  const rows = [
    ...ex.existing.map((s) => toRow(s, "existing", redundant)),
    ...ex.removed.map((s) => toRow(s, "removed", redundant)),
    ...ex.added.map((s) => toRow(s, "added", redundant)),
  ];
  return rows.sort(byStartTime);
}

export function bucketCounts(rows: PlanRow[]): Record<Bucket, number> {
  const counts: Record<Bucket, number> = {
    plain: 0, existing: 0, removed: 0, added: 0,
  };
  for (const row of rows) {
    counts[row.bucket] += 1;
  }
  return counts;
}

// --- rendering ---

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function barWidth(row: PlanRow, makespan: number): number {
  if (makespan <= 0) {
    return 0;
  }
  const width = (parseFloat(row.duration) / makespan) * 100;
  return Math.max(1, Math.min(100, width));
}

function barOffset(row: PlanRow, makespan: number): number {
  if (makespan <= 0) {
    return 0;
  }
  return Math.min(99, (parseFloat(row.time) / makespan) * 100);
}

export function renderPlanTable(rows: PlanRow[], cost: string | null): string {
  const makespan = rows.reduce((m, r) => Math.max(m, parseFloat(r.end)), 0);
  const body = rows.map((row) => {
    const flags = row.redundant
      ? ' <span class="redundant-flag" title="removable together with its reversal">redundant</span>'
      : "";
    return `<tr class="plan-row bucket-${row.bucket}">`
      + `<td class="col-time">${escapeHtml(row.time)}</td>`
      + `<td class="col-action"><code>${escapeHtml(row.action)}</code>${flags}</td>`
      + `<td class="col-duration">${escapeHtml(row.duration)}</td>`
      + `<td class="col-bar"><div class="bar-track">`
      + `<div class="bar" style="margin-left:${barOffset(row, makespan)}%;`
      + `width:${barWidth(row, makespan)}%"></div></div></td>`
      + `</tr>`;
  }).join("\n");

  const badge = cost === null
    ? ""
    : `<span class="badge cost-badge">cost ${escapeHtml(cost)}</span>`;
  return `<div class="plan-header">${badge}</div>`
    + `<table class="plan-table">`
    + `<thead><tr><th>start</th><th>action</th><th>duration</th><th></th></tr></thead>`
    + `<tbody>\n${body}\n</tbody></table>`;
}

export function renderDiffSummary(ex: ExplanationDoc): string {
  const warn = ex.redundant_steps.length > 0
    ? `<span class="badge warn-badge">${ex.redundant_steps.length} redundant</span>`
    : "";
  return `<div class="diff-summary">`
    + `<span class="badge diffcost-badge">diffcost ${escapeHtml(ex.diffcost)}</span>`
    + `<span class="badge bucket-existing">${ex.existing.length} kept</span>`
    + `<span class="badge bucket-removed">${ex.removed.length} removed</span>`
    + `<span class="badge bucket-added">${ex.added.length} added</span>`
    + warn
    + `</div>`;
}
