// Application shell: owns the page state, talks to the API client, and
// re-renders the panels from the view-model modules. All truth lives in
// API responses; this file only routes events and strings.

import { ApiClient, ApiError } from "./api.js";
import { parseDot, renderGraph } from "./dotGraph.js";
import { diffRows, planRows, renderDiffSummary, renderPlanTable } from "./planView.js";
import {
  FormState,
  emptyForm,
  isComplete,
  renderQuestionForm,
  stepChoices,
  toWire,
} from "./questionForm.js";
import { renderTree } from "./treeNavigator.js";
import type { NodeDoc, TreeDoc } from "./types.js";

const api = new ApiClient("");

interface AppState {
  session: string | null;
  selected: string | null;
  tree: TreeDoc | null;
  node: NodeDoc | null;
  schemas: string[];
  schema: string | null;
  groundActions: string[];
  form: FormState;
  busy: boolean;
  abort: AbortController | null;
  showGraph: boolean;
  error: string | null;
  notice: string | null;
}

const state: AppState = {
  session: null,
  selected: null,
  tree: null,
  node: null,
  schemas: [],
  schema: null,
  groundActions: [],
  form: emptyForm(),
  busy: false,
  abort: null,
  showGraph: false,
  error: null,
  notice: null,
};

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) {
    const where = err.position
      ? ` (line ${err.position.line}, column ${err.position.column})`
      : "";
    return `${err.type}: ${err.message}${where}`;
  }
  return err instanceof Error ? err.message : String(err);
}

// --- rendering ---

function renderStatus(): void {
  const line = el<HTMLDivElement>("status-line");
  if (state.busy) {
    line.className = "status busy";
    line.innerHTML = `planning&hellip; <button type="button" id="cancel-ask">cancel</button>`;
    const cancel = document.getElementById("cancel-ask");
    cancel?.addEventListener("click", () => state.abort?.abort());
  } else if (state.error !== null) {
    line.className = "status error";
    line.textContent = state.error;
  } else if (state.notice !== null) {
    line.className = "status notice";
    line.textContent = state.notice;
  } else {
    line.className = "status";
    line.textContent = state.session === null
      ? "load a model to begin"
      : `session ${state.session}`;
  }
}

function renderTreePanel(): void {
  const panel = el<HTMLDivElement>("tree-panel");
  panel.innerHTML = state.tree === null
    ? `<p class="hint">the explanation tree appears here</p>`
    : renderTree(state.tree, state.selected);
}

function renderPlanPanel(): void {
  const panel = el<HTMLDivElement>("plan-panel");
  const node = state.node;
  if (node === null) {
    panel.innerHTML = `<p class="hint">no node selected</p>`;
    return;
  }
  const parts: string[] = [];
  if (node.question_text !== null) {
    parts.push(`<p class="node-question">${node.id}: `
      + `${escapeText(node.question_text)} &rarr; ${escapeText(node.status)}</p>`);
  }
  if (node.plan === null) {
    parts.push(`<p class="no-plan">no plan satisfies these constraints`
      + ` (${escapeText(node.status)})</p>`);
  } else if (node.explanation !== null) {
    parts.push(renderDiffSummary(node.explanation));
    parts.push(renderPlanTable(diffRows(node), node.plan.cost));
  } else {
    parts.push(renderPlanTable(planRows(node.plan), node.plan.cost));
  }
  if (node.validation !== null) {
    const cls = node.validation.valid ? "validation ok" : "validation bad";
    parts.push(`<p class="${cls}">${escapeText(node.validation.text)}</p>`);
  }
  if (node.explanation?.causal_dot) {
    const label = state.showGraph ? "hide causal difference" : "show causal difference";
    parts.push(`<button type="button" id="graph-toggle">${label}</button>`);
    if (state.showGraph) {
      parts.push(renderGraph(parseDot(node.explanation.causal_dot)));
    }
  }
  panel.innerHTML = parts.join("\n");
  document.getElementById("graph-toggle")?.addEventListener("click", () => {
    state.showGraph = !state.showGraph;
    renderPlanPanel();
  });
}

function escapeText(text: string): string {
  const div = document.createElement("div");
  div.textContent = text;
  return div.innerHTML;
}

function renderFormPanel(): void {
  const panel = el<HTMLDivElement>("question-panel");
  if (state.node === null || state.node.plan === null) {
    panel.innerHTML = state.session === null
      ? ""
      : `<p class="hint">select a node with a plan to question it</p>`;
    return;
  }
  const schemaOptions = state.schemas.map((name) =>
    `<option value="${name}"${name === state.schema ? " selected" : ""}>${name}</option>`)
    .join("");
  const blank = `<option value=""${state.schema === null ? " selected" : ""} disabled>`
    + `pick an action schema</option>`;
  const schemaSelect =
    `<label>schema<select id="schema-select">${blank}${schemaOptions}</select></label>`;
  panel.innerHTML = `<h2>ask about ${state.node.id}</h2>`
    + schemaSelect
    + renderQuestionForm(state.form, {
      groundActions: state.groundActions,
      steps: stepChoices(state.node.plan),
    });
  bindFormEvents(panel);
}

function renderAll(): void {
  renderStatus();
  renderTreePanel();
  renderPlanPanel();
  renderFormPanel();
}

// --- actions ---

async function refreshTree(): Promise<void> {
  if (state.session === null) {
    return;
  }
  state.tree = await api.tree(state.session);
}

async function selectNode(nodeId: string): Promise<void> {
  if (state.session === null) {
    return;
  }
  try {
    state.node = await api.node(state.session, nodeId);
    state.selected = nodeId;
    state.showGraph = false;
    state.form = emptyForm();
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      // stale id: the tree moved under us, re-fetch and fall back to root
      await refreshTree();
      state.selected = null;
      state.node = null;
    } else {
      state.error = describeError(err);
    }
  }
  renderAll();
}

async function createSessionFromForm(): Promise<void> {
  const domain = el<HTMLTextAreaElement>("domain-text").value;
  const problem = el<HTMLTextAreaElement>("problem-text").value;
  const plan = el<HTMLTextAreaElement>("plan-text").value;
  state.error = null;
  state.notice = plan.trim() === "" ? "planning an initial plan..." : null;
  renderStatus();
  try {
    const created = await api.createSession(domain, problem, plan);
    state.session = created.session;
    state.notice = null;
    state.schemas = (await api.groundSchemas(created.session)).schemas;
    state.schema = null;
    state.groundActions = [];
    await refreshTree();
    await selectNode(created.root);
  } catch (err) {
    state.notice = null;
    state.error = describeError(err);
    renderAll();
  }
}

async function pickSchema(name: string): Promise<void> {
  if (state.session === null) {
    return;
  }
  state.schema = name;
  try {
    state.groundActions = (await api.groundActions(state.session, name)).actions;
  } catch (err) {
    state.error = describeError(err);
    state.groundActions = [];
  }
  renderFormPanel();
  renderStatus();
}

async function submitQuestion(): Promise<void> {
  if (state.session === null || state.selected === null
      || !isComplete(state.form) || state.busy) {
    return;
  }
  const wire = toWire(state.form);
  state.busy = true;
  state.error = null;
  state.abort = new AbortController();
  renderStatus();
  try {
    const answer = await api.ask(state.session, state.selected, wire,
      state.abort.signal);
    state.busy = false;
    state.abort = null;
    await refreshTree();
    await selectNode(answer.node);
  } catch (err) {
    state.busy = false;
    state.abort = null;
    if (err instanceof DOMException && err.name === "AbortError") {
      // the server keeps planning; the tree will show the node when done
      state.notice = "request abandoned; refresh the tree to see the outcome";
    } else if (err instanceof ApiError && err.busy) {
      state.notice = "another question is already being answered on this session";
    } else {
      state.error = describeError(err);
    }
    await refreshTree();
    renderAll();
  }
}

// --- event wiring ---

function bindFormEvents(panel: HTMLElement): void {
  panel.querySelector("#schema-select")?.addEventListener("change", (ev) => {
    void pickSchema((ev.target as HTMLSelectElement).value);
  });
  for (const input of panel.querySelectorAll("[data-field]")) {
    input.addEventListener("change", (ev) => {
      const target = ev.target as HTMLInputElement | HTMLSelectElement;
      const field = target.dataset.field ?? "";
      if (field === "kind") {
        const keep = state.form.kind;
        state.form = emptyForm();
        state.form.kind = (target.value || keep) as FormState["kind"];
      } else if (field === "step") {
        const index = parseInt(target.value, 10);
        const step = state.node?.plan?.steps[index];
        state.form.occurrenceIndex = Number.isNaN(index) ? null : index;
        state.form.actionA = step?.action ?? "";
      } else if (field === "direction") {
        state.form.direction = target.value === "after" ? "after" : "before";
      } else if (field === "contained") {
        state.form.contained = (target as HTMLInputElement).checked;
      } else if (field === "actionA" || field === "actionB"
          || field === "lb" || field === "ub") {
        state.form[field] = target.value;
      }
      renderFormPanel();
    });
  }
  panel.querySelector(".question-form")?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    void submitQuestion();
  });
}

function bindFileInput(inputId: string, targetId: string): void {
  el<HTMLInputElement>(inputId).addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) {
      return;
    }
    void file.text().then((text) => {
      el<HTMLTextAreaElement>(targetId).value = text;
    });
  });
}

export function boot(): void {
  el<HTMLButtonElement>("create-session").addEventListener("click", () => {
    void createSessionFromForm();
  });
  bindFileInput("domain-file", "domain-text");
  bindFileInput("problem-file", "problem-text");
  bindFileInput("plan-file", "plan-text");
  el<HTMLDivElement>("tree-panel").addEventListener("click", (ev) => {
    const pick = (ev.target as HTMLElement).closest<HTMLElement>(".tree-pick");
    if (pick?.dataset.node) {
      void selectNode(pick.dataset.node);
    }
  });
  renderAll();
}

if (typeof document !== "undefined" && document.getElementById("status-line")) {
  boot();
}
