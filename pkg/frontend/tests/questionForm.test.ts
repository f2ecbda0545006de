import { describe, expect, test } from "vitest";
import {
  FORM_KINDS,
  FormState,
  emptyForm,
  isComplete,
  renderQuestionForm,
  stepChoices,
  toWire,
} from "../src/questionForm.js";
import type { PlanDoc } from "../src/types.js";

function form(patch: Partial<FormState>): FormState {
  return { ...emptyForm(), ...patch };
}

const PLAN: PlanDoc = {
  steps: [
    { time: "0.000", action: "(go a b)", duration: "4.000", end: "4.000" },
    { time: "4.001", action: "(load x)", duration: "2.000", end: "6.001" },
  ],
  cost: "6.001",
  text: "",
};

describe("form kinds", () => {
  test("the selector offers exactly six kinds", () => {
    expect(FORM_KINDS).toHaveLength(6);
    expect(new Set(FORM_KINDS).size).toBe(6);
  });
});

describe("isComplete", () => {
  test("forbid and force need only the action", () => {
    expect(isComplete(form({ kind: "ForbidAction" }))).toBe(false);
    expect(isComplete(form({ kind: "ForbidAction", actionA: "(go a b)" }))).toBe(true);
    expect(isComplete(form({ kind: "ForceAction", actionA: "(go a b)" }))).toBe(true);
  });

  test("replace and order need both actions", () => {
    const partial = form({ kind: "Replace", actionA: "(go a b)" });
    expect(isComplete(partial)).toBe(false);
    expect(isComplete({ ...partial, actionB: "(load x)" })).toBe(true);
    expect(isComplete(form({ kind: "Order", actionA: "(go a b)" }))).toBe(false);
    expect(isComplete(form({ kind: "Order", actionA: "(go a b)", actionB: "(load x)" })))
      .toBe(true);
  });

  test("in-state replacement also needs the step index", () => {
    const noIndex = form({ kind: "ReplaceInState", actionA: "(go a b)",
      actionB: "(load x)" });
    expect(isComplete(noIndex)).toBe(false);
    expect(isComplete({ ...noIndex, occurrenceIndex: 0 })).toBe(true);
  });

  test("time windows need well-formed decimal bounds", () => {
    const base = form({ kind: "TimeWindow", actionA: "(go a b)" });
    expect(isComplete(base)).toBe(false);
    expect(isComplete({ ...base, lb: "1", ub: "abc" })).toBe(false);
    expect(isComplete({ ...base, lb: "1.2.3", ub: "4" })).toBe(false);
    expect(isComplete({ ...base, lb: "-1", ub: "4" })).toBe(false);
    expect(isComplete({ ...base, lb: "0", ub: "4.001" })).toBe(true);
  });
});

describe("toWire", () => {
  test("rejects incomplete forms", () => {
    expect(() => toWire(form({ kind: "ForbidAction" }))).toThrow(/incomplete/);
  });

  test("single-action kinds carry only kind and action_a", () => {
    expect(toWire(form({ kind: "ForbidAction", actionA: "(go a b)" })))
      .toEqual({ kind: "ForbidAction", action_a: "(go a b)" });
    expect(toWire(form({ kind: "ForceAction", actionA: "(load x)" })))
      .toEqual({ kind: "ForceAction", action_a: "(load x)" });
  });

  test("replacement kinds carry action_b, in-state adds the index", () => {
    expect(toWire(form({ kind: "Replace", actionA: "(go a b)", actionB: "(load x)" })))
      .toEqual({ kind: "Replace", action_a: "(go a b)", action_b: "(load x)" });
    expect(toWire(form({ kind: "ReplaceInState", actionA: "(go a b)",
      actionB: "(load x)", occurrenceIndex: 4 })))
      .toEqual({ kind: "ReplaceInState", action_a: "(go a b)",
        action_b: "(load x)", occurrence_index: 4 });
  });

  test("the direction toggle expands to the two order wire kinds", () => {
    const base = form({ kind: "Order", actionA: "(go a b)", actionB: "(load x)" });
    expect(toWire({ ...base, direction: "before" }))
      .toEqual({ kind: "OrderBefore", action_a: "(go a b)", action_b: "(load x)" });
    expect(toWire({ ...base, direction: "after" }))
      .toEqual({ kind: "OrderAfter", action_a: "(go a b)", action_b: "(load x)" });
  });

  test("window bounds stay the typed strings; contained only when set", () => {
    const base = form({ kind: "TimeWindow", actionA: "(go a b)",
      lb: "0.5", ub: "10" });
    expect(toWire(base)).toEqual({ kind: "TimeWindow", action_a: "(go a b)",
      window: { lb: "0.5", ub: "10" } });
    expect(toWire({ ...base, contained: true })).toEqual({
      kind: "TimeWindow", action_a: "(go a b)",
      window: { lb: "0.5", ub: "10", contained: true },
    });
    expect("contained" in (toWire(base).window ?? {})).toBe(false);
  });
});

describe("stepChoices", () => {
  test("one choice per plan step, keyed by position", () => {
    const choices = stepChoices(PLAN);
    expect(choices).toHaveLength(2);
    expect(choices[1]).toMatchObject({ index: 1, action: "(load x)" });
    expect(choices[0]!.label).toContain("step 0 at 0.000");
  });
});

describe("renderQuestionForm", () => {
  const options = { groundActions: ["(go a b)", "(load x)"], steps: stepChoices(PLAN) };

  test("submit stays disabled until the kind's fields are filled", () => {
    const empty = renderQuestionForm(form({ kind: "ForbidAction" }), options);
    expect(empty).toMatch(/class="ask-button" disabled/);
    const ready = renderQuestionForm(
      form({ kind: "ForbidAction", actionA: "(go a b)" }), options);
    expect(ready).toMatch(/class="ask-button">/);
    expect(ready).not.toMatch(/ask-button" disabled/);
  });

  test("offers all six kinds and per-kind inputs", () => {
    const html = renderQuestionForm(form({ kind: "TimeWindow" }), options);
    expect(html.match(/<option value="\w+"/g)?.length).toBeGreaterThanOrEqual(6);
    expect(html).toContain('data-field="lb"');
    expect(html).toContain('data-field="ub"');
    expect(html).toContain('data-field="contained"');
  });

  test("in-state replacement picks the replaced action from plan steps", () => {
    const html = renderQuestionForm(form({ kind: "ReplaceInState" }), options);
    expect(html).toContain('data-field="step"');
    expect(html).toContain("step 1 at 4.001");
    expect(html).toContain('data-field="actionB"');
    expect(html).not.toContain('data-field="actionA"');
  });

  test("ordering questions expose the direction toggle", () => {
    const html = renderQuestionForm(form({ kind: "Order" }), options);
    expect(html).toContain('data-field="direction"');
    expect(html).toContain("after this one finishes");
    expect(html).toContain("before this one starts");
  });
});
