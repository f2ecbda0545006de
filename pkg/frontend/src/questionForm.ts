// Question form model. The selector offers six kinds; ordering questions
// carry a direction toggle and expand to the OrderBefore/OrderAfter wire
// kinds on submit. The emitted document is exactly the wire format: bounds
// stay the typed decimal strings.

import { escapeHtml } from "./planView.js";
import type { PlanDoc, QuestionWire } from "./types.js";

export type FormKind =
  | "ForbidAction"
  | "ForceAction"
  | "Replace"
  | "ReplaceInState"
  | "Order"
  | "TimeWindow";

export const FORM_KINDS: readonly FormKind[] = [
  "ForbidAction",
  "ForceAction",
  "Replace",
  "ReplaceInState",
  "Order",
  "TimeWindow",
];

export const KIND_LABELS: Record<FormKind, string> = {
  ForbidAction: "Never use an action",
  ForceAction: "Use an action somewhere",
  Replace: "Use one action instead of another",
  ReplaceInState: "Do something else at a step",
  Order: "Order two actions",
  TimeWindow: "Constrain an action to a time window",
};

export interface FormState {
  kind: FormKind;
  actionA: string;
  actionB: string;
  occurrenceIndex: number | null;
  direction: "before" | "after";
  lb: string;
  ub: string;
  contained: boolean;
}

export function emptyForm(): FormState {
  return {
    kind: "ForbidAction",
    actionA: "",
    actionB: "",
    occurrenceIndex: null,
    direction: "before",
    lb: "",
    ub: "",
    contained: false,
  };
}

export function needsActionB(kind: FormKind): boolean {
  return kind === "Replace" || kind === "ReplaceInState" || kind === "Order";
}

export function needsWindow(kind: FormKind): boolean {
  return kind === "TimeWindow";
}

const DECIMAL = /^\d+(\.\d+)?$/;

/** Submit gate: every field the kind requires is filled and well-shaped. */
export function isComplete(state: FormState): boolean {
  if (state.actionA === "") {
    return false;
  }
  if (needsActionB(state.kind) && state.actionB === "") {
    return false;
  }
  if (state.kind === "ReplaceInState" && state.occurrenceIndex === null) {
    return false;
  }
  if (needsWindow(state.kind)
      && !(DECIMAL.test(state.lb) && DECIMAL.test(state.ub))) {
    return false;
  }
  return true;
}

export function toWire(state: FormState): QuestionWire {
  if (!isComplete(state)) {
    throw new Error("question form is incomplete");
  }
  if (state.kind === "Order") {
    return state.direction === "before"
      ? { kind: "OrderBefore", action_a: state.actionA, action_b: state.actionB }
      : { kind: "OrderAfter", action_a: state.actionA, action_b: state.actionB };
  }
  switch (state.kind) {
    case "ForbidAction":
    case "ForceAction":
      return { kind: state.kind, action_a: state.actionA };
    case "Replace":
      return { kind: state.kind, action_a: state.actionA, action_b: state.actionB };
    case "ReplaceInState":
      return {
        kind: state.kind,
        action_a: state.actionA,
        action_b: state.actionB,
        occurrence_index: state.occurrenceIndex as number,
      };
    case "TimeWindow": {
      const wire: QuestionWire = {
        kind: state.kind,
        action_a: state.actionA,
        window: { lb: state.lb, ub: state.ub },
      };
      if (state.contained) {
        wire.window = { lb: state.lb, ub: state.ub, contained: true };
      }
      return wire;
    }
  }
}

export interface StepChoice {
  index: number;
  action: string;
  label: string;
}

/** For in-state replacement the replaced action is one of the node's own
 * plan steps, picked by position. */
export function stepChoices(plan: PlanDoc): StepChoice[] {
  return plan.steps.map((step, index) => ({
    index,
    action: step.action,
    label: `step ${index} at ${step.time}: ${step.action}`,
  }));
}

// --- rendering ---

export interface FormOptions {
  groundActions: string[];
  steps: StepChoice[];
}

function renderSelect(name: string, value: string, options: string[],
    placeholder: string): string {
  const rows = options.map((option) =>
    `<option value="${escapeHtml(option)}"${option === value ? " selected" : ""}>`
    + `${escapeHtml(option)}</option>`).join("");
  const blank = `<option value=""${value === "" ? " selected" : ""} disabled>`
    + `${escapeHtml(placeholder)}</option>`;
  return `<select name="${name}" data-field="${name}">${blank}${rows}</select>`;
}

function renderStepSelect(value: number | null, steps: StepChoice[]): string {
  const rows = steps.map((step) =>
    `<option value="${step.index}"${step.index === value ? " selected" : ""}>`
    + `${escapeHtml(step.label)}</option>`).join("");
  const blank = `<option value=""${value === null ? " selected" : ""} disabled>`
    + `pick the step to replace</option>`;
  return `<select name="step" data-field="step">${blank}${rows}</select>`;
}

export function renderQuestionForm(state: FormState, options: FormOptions): string {
  const kinds = FORM_KINDS.map((kind) =>
    `<option value="${kind}"${kind === state.kind ? " selected" : ""}>`
    + `${KIND_LABELS[kind]}</option>`).join("");

  const parts: string[] = [
    `<label>question<select name="kind" data-field="kind">${kinds}</select></label>`,
  ];

  if (state.kind === "ReplaceInState") {
    parts.push(`<label>replace${renderStepSelect(state.occurrenceIndex, options.steps)}</label>`);
    parts.push(`<label>with${renderSelect("actionB", state.actionB,
      options.groundActions, "pick the replacement")}</label>`);
  } else {
    parts.push(`<label>action${renderSelect("actionA", state.actionA,
      options.groundActions, "pick an action")}</label>`);
    if (state.kind === "Replace") {
      parts.push(`<label>instead use${renderSelect("actionB", state.actionB,
        options.groundActions, "pick the replacement")}</label>`);
    }
    if (state.kind === "Order") {
      const before = state.direction === "before";
      parts.push(`<label>must run`
        + `<select name="direction" data-field="direction">`
        + `<option value="before"${before ? " selected" : ""}>after this one finishes</option>`
        + `<option value="after"${before ? "" : " selected"}>before this one starts</option>`
        + `</select></label>`);
      parts.push(`<label>other action${renderSelect("actionB", state.actionB,
        options.groundActions, "pick the other action")}</label>`);
    }
    if (state.kind === "TimeWindow") {
      parts.push(`<label>from<input name="lb" data-field="lb" inputmode="decimal"`
        + ` value="${escapeHtml(state.lb)}" placeholder="0"></label>`);
      parts.push(`<label>until<input name="ub" data-field="ub" inputmode="decimal"`
        + ` value="${escapeHtml(state.ub)}" placeholder="10"></label>`);
      parts.push(`<label class="inline"><input type="checkbox" name="contained"`
        + ` data-field="contained"${state.contained ? " checked" : ""}>`
        + `whole action inside the window</label>`);
    }
  }

  const disabled = isComplete(state) ? "" : " disabled";
  parts.push(`<button type="submit" class="ask-button"${disabled}>ask</button>`);
  return `<form class="question-form">${parts.join("\n")}</form>`;
}
