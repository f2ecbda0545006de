// Wire types mirrored from the HTTP API. Times, durations and costs are
// decimal strings end to end; the client never converts them to floats
// except for layout geometry (bar widths, sort order).

export interface StepDoc {
  time: string;
  action: string;
  duration: string;
  end: string;
}

export interface PlanDoc {
  steps: StepDoc[];
  cost: string;
  text: string;
}

export interface ExplanationDoc {
  existing: StepDoc[];
  removed: StepDoc[];
  added: StepDoc[];
  diffcost: string;
  redundant_steps: number[];
  causal_dot: string | null;
}

export interface ValidationFailure {
  time: string;
  reason: string;
  detail: string;
}

export interface ValidationDoc {
  valid: boolean;
  cost: string | null;
  failure: ValidationFailure | null;
  text: string;
}

export interface WindowWire {
  lb: string;
  ub: string;
  contained?: boolean;
}

export interface QuestionWire {
  kind: string;
  action_a: string;
  action_b?: string;
  occurrence_index?: number;
  window?: WindowWire;
}

export interface NodeDoc {
  id: string;
  parent: string | null;
  status: string;
  created_at: string;
  question: QuestionWire | null;
  question_text: string | null;
  plan: PlanDoc | null;
  explanation: ExplanationDoc | null;
  validation: ValidationDoc | null;
  hmodel: { domain: string; problem: string };
  planner_log: string;
}

export interface TreeRow {
  id: string;
  parent: string | null;
  kind: string | null;
  question: string | null;
  status: string;
  cost: string | null;
  diffcost: string | null;
  flagged: boolean;
  created_at: string;
}

export interface TreeDoc {
  session: string;
  nodes: TreeRow[];
}

export interface CreateSessionResult {
  session: string;
  root: string;
  cost: string;
}

export interface AskResult {
  node: string;
  status: string;
  cost?: string;
  diffcost?: string;
}

export interface ErrorBody {
  error: {
    type: string;
    message: string;
    position?: { line: number; column: number };
  };
}
