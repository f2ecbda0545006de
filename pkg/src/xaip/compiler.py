"""Compile contrastive questions into hypothetical models.

Each question kind rewrites the domain/problem pair under a reserved `xaip__`
name prefix: forbidding via enumerated enabled-facts, forcing via a grounded
clone with a phantom goal effect, ordering via a token fact produced by one
clone and required by the other, time windows via a windowed clone gated by
TILs, and in-state replacement via projection of the plan prefix into a new
initial state.

Compilation composes: a question applies on top of an HModel that may already
carry earlier questions. Clones copy the operator body as it stood before the
current question, so order/window clones are not blocked by their own
question's forbid; questions target original action names only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import CompilationError, InapplicableSuggestionError, PddlSemanticError
from .model import (
    AT_END,
    AT_START,
    OVER_ALL,
    Atom,
    Domain,
    DurativeAction,
    GroundAction,
    Literal,
    Parameter,
    PlanStep,
    PredicateDecl,
    Problem,
    TimedCondition,
    TimedEffect,
    TimedInitialLiteral,
    TimedPlan,
    action_groundings,
    ground_action,
    instantiate,
    sort_plan_steps,
)
from .numbers import format_decimal, parse_decimal
from .validator import (
    R_END_COND,
    R_OVERALL_COND,
    R_START_COND,
    state_at,
    validate,
)

RESERVED_PREFIX = "xaip__"

FORBID = "ForbidAction"
FORCE = "ForceAction"
REPLACE = "Replace"
REPLACE_IN_STATE = "ReplaceInState"
ORDER_BEFORE = "OrderBefore"
ORDER_AFTER = "OrderAfter"
TIME_WINDOW = "TimeWindow"

KINDS = (FORBID, FORCE, REPLACE, REPLACE_IN_STATE, ORDER_BEFORE, ORDER_AFTER, TIME_WINDOW)

# which optional fields each kind requires beyond action_a
_NEEDS_B = {REPLACE, REPLACE_IN_STATE, ORDER_BEFORE, ORDER_AFTER}
_NEEDS_INDEX = {REPLACE_IN_STATE}
_NEEDS_WINDOW = {TIME_WINDOW}


@dataclass(frozen=True)
class Window:
    lb: Fraction
    ub: Fraction
    contained: bool = False


@dataclass(frozen=True)
class FormalQuestion:
    """A machine-readable contrastive question."""

    kind: str
    action_a: GroundAction
    action_b: GroundAction | None = None
    occurrence_index: int | None = None
    window: Window | None = None

    def describe(self) -> str:
        if self.kind == FORBID:
            return f"forbid {self.action_a}"
        if self.kind == FORCE:
            return f"force {self.action_a}"
        if self.kind == REPLACE:
            return f"replace {self.action_a} with {self.action_b}"
        if self.kind == REPLACE_IN_STATE:
            return (f"replace {self.action_a} at step {self.occurrence_index} "
                    f"with {self.action_b}")
        if self.kind == ORDER_BEFORE:
            return f"{self.action_a} only after {self.action_b} has finished"
        if self.kind == ORDER_AFTER:
            return f"{self.action_b} only after {self.action_a} has finished"
        w = self.window
        mode = "contained in" if w and w.contained else "started within"
        return (f"{self.action_a} {mode} "
                f"[{format_decimal(w.lb)}, {format_decimal(w.ub)})") if w else self.kind

    def to_wire(self) -> dict:
        doc: dict = {"kind": self.kind, "action_a": str(self.action_a)}
        if self.action_b is not None:
            doc["action_b"] = str(self.action_b)
        if self.occurrence_index is not None:
            doc["occurrence_index"] = self.occurrence_index
        if self.window is not None:
            doc["window"] = {"lb": format_decimal(self.window.lb),
                             "ub": format_decimal(self.window.ub),
                             "contained": self.window.contained}
        return doc


def _parse_action_literal(text: str, domain: Domain, problem: Problem) -> GroundAction:
    if not isinstance(text, str):
        raise CompilationError(f"action literal must be a string, got {type(text).__name__}")
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise CompilationError(f"action literal must look like '(name arg ...)', got {text!r}")
    parts = body[1:-1].split()
    if not parts:
        raise CompilationError("empty action literal")
    name, args = parts[0], tuple(parts[1:])
    if name.startswith(RESERVED_PREFIX):
        raise CompilationError(
            f"questions must target original actions, not generated ones: {name!r}")
    try:
        return ground_action(domain, problem, name, args)
    except PddlSemanticError as err:
        raise CompilationError(str(err)) from err


def _parse_bound(value, label: str) -> Fraction:
    try:
        if isinstance(value, float):
            return parse_decimal(repr(value))
        if isinstance(value, (int, str)):
            return parse_decimal(str(value))
    except Exception as err:
        raise CompilationError(f"window {label} is not a decimal: {value!r}") from err
    raise CompilationError(f"window {label} must be a number or decimal string")


def question_from_wire(doc: dict, domain: Domain, problem: Problem) -> FormalQuestion:
    """Parse and shape-check the wire form of a question against a model."""
    if not isinstance(doc, dict):
        raise CompilationError("question must be an object")
    unknown = set(doc) - {"kind", "action_a", "action_b", "occurrence_index", "window"}
    if unknown:
        raise CompilationError(f"unknown question fields: {sorted(unknown)}")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise CompilationError(f"unknown question kind {kind!r}; expected one of {', '.join(KINDS)}")
    if "action_a" not in doc:
        raise CompilationError("question requires action_a")
    action_a = _parse_action_literal(doc["action_a"], domain, problem)

    action_b = None
    if kind in _NEEDS_B:
        if "action_b" not in doc:
            raise CompilationError(f"{kind} requires action_b")
        action_b = _parse_action_literal(doc["action_b"], domain, problem)
    elif "action_b" in doc:
        raise CompilationError(f"{kind} does not take action_b")

    occurrence_index = None
    if kind in _NEEDS_INDEX:
        if "occurrence_index" not in doc:
            raise CompilationError(f"{kind} requires occurrence_index")
        occurrence_index = doc["occurrence_index"]
        if not isinstance(occurrence_index, int) or isinstance(occurrence_index, bool) \
                or occurrence_index < 0:
            raise CompilationError("occurrence_index must be a non-negative integer")
    elif "occurrence_index" in doc:
        raise CompilationError(f"{kind} does not take occurrence_index")

    window = None
    if kind in _NEEDS_WINDOW:
        raw = doc.get("window")
        if not isinstance(raw, dict):
            raise CompilationError(f"{kind} requires window: {{lb, ub}}")
        extra = set(raw) - {"lb", "ub", "contained"}
        if extra:
            raise CompilationError(f"unknown window fields: {sorted(extra)}")
        if "lb" not in raw or "ub" not in raw:
            raise CompilationError("window requires both lb and ub")
        lb = _parse_bound(raw["lb"], "lb")
        ub = _parse_bound(raw["ub"], "ub")
        contained = raw.get("contained", False)
        if not isinstance(contained, bool):
            raise CompilationError("window contained flag must be a boolean")
        if lb < 0:
            raise CompilationError("window lb must be >= 0")
        if not lb < ub:
            raise CompilationError(
                f"window requires lb < ub, got [{format_decimal(lb)}, {format_decimal(ub)})")
        window = Window(lb, ub, contained)
    elif "window" in doc:
        raise CompilationError(f"{kind} does not take window")

    return FormalQuestion(kind, action_a, action_b, occurrence_index, window)


@dataclass(frozen=True)
class HModel:
    """A hypothetical model: the original pair revised by compiled questions."""

    domain: Domain
    problem: Problem
    provenance: tuple[FormalQuestion, ...] = ()
    generated: tuple[str, ...] = ()
    clone_origins: dict[str, GroundAction] = field(default_factory=dict)
    plan_prefix: tuple[PlanStep, ...] | None = None
    time_origin: Fraction = Fraction(0)

    @classmethod
    def root(cls, domain: Domain, problem: Problem) -> HModel:
        return cls(domain, problem)


@dataclass(frozen=True)
class ProjectionResult:
    initial_state: frozenset[Atom]
    tils: tuple[TimedInitialLiteral, ...]
    prefix: tuple[PlanStep, ...]
    b_start: Fraction


def _ground_conditions(domain: Domain, action: GroundAction):
    schema = domain.action(action.name)
    return instantiate(schema, action.args)


def project_replace(domain: Domain, problem: Problem, plan: TimedPlan,
                    occurrence_index: int, action_b: GroundAction) -> ProjectionResult:
    """Project the plan at the chosen step onto a fresh initial state with the
    suggested action applied there.

    The kept prefix is simulated up to the replaced step's start time; effects
    landing exactly at that instant belong to the new initial state rather
    than to zero-time TILs. Steps still executing become TILs delivering their
    end effects at relative offsets, as does the suggested action itself.
    """
    steps = plan.steps
    if not 0 <= occurrence_index < len(steps):
        raise CompilationError(
            f"occurrence_index {occurrence_index} out of range for a plan of {len(steps)} steps")
    b_start = steps[occurrence_index].time
    kept = steps[:occurrence_index]
    try:
        base, in_flight = state_at(domain, problem, TimedPlan(kept), b_start, inclusive=True)
    except PddlSemanticError as err:
        raise CompilationError(f"plan prefix is invalid: {err}") from err

    conds, effs = _ground_conditions(domain, action_b)
    missing = [c.atom for c in conds if c.when == AT_START and c.atom not in base]
    if missing:
        raise InapplicableSuggestionError(
            "suggested action inapplicable in state S: "
            f"{action_b} requires {', '.join(str(a) for a in sorted(missing, key=str))}")

    state = set(base)
    for eff in effs:
        if eff.when == AT_START:
            if eff.literal.positive:
                state.add(eff.literal.atom)
            else:
                state.discard(eff.literal.atom)

    tils: list[TimedInitialLiteral] = []
    for eff in effs:
        if eff.when == AT_END:
            tils.append(TimedInitialLiteral(action_b.duration, eff.literal))
    for idx in in_flight:
        step = kept[idx]
        offset = step.time + step.duration - b_start
        _, step_effs = _ground_conditions(domain, step.action)
        for eff in step_effs:
            if eff.when == AT_END:
                tils.append(TimedInitialLiteral(offset, eff.literal))
    for til in problem.tils:
        if til.time > b_start:
            tils.append(TimedInitialLiteral(til.time - b_start, til.literal))

    prefix = kept + (PlanStep(b_start, action_b, action_b.duration),)
    return ProjectionResult(frozenset(state), tuple(tils), prefix, b_start)


class _Workspace:
    """Mutable scratch copy of a model while one question compiles onto it."""

    def __init__(self, hmodel: HModel):
        self.domain = hmodel.domain
        self.problem = hmodel.problem
        self.predicates = list(self.domain.predicates)
        self.actions = {a.name: a for a in self.domain.actions}
        self.entry_actions = dict(self.actions)  # bodies before this question
        self.init = list(self.problem.init)
        self.tils = list(self.problem.tils)
        self.goal = list(self.problem.goal)
        self.generated = list(hmodel.generated)
        self.clone_origins = dict(hmodel.clone_origins)

    def declare_predicate(self, name: str, params: tuple[Parameter, ...]) -> None:
        if any(p.name == name for p in self.predicates):
            raise CompilationError(f"generated predicate name already taken: {name}")
        self.predicates.append(PredicateDecl(name, params))
        self.generated.append(name)

    def add_clone(self, name: str, clone: DurativeAction, origin: GroundAction) -> None:
        if name in self.actions:
            raise CompilationError(f"generated action name already taken: {name}")
        self.actions[name] = clone
        self.generated.append(name)
        self.clone_origins[name] = origin

    def forbid(self, action: GroundAction) -> None:
        op = self.entry_actions[action.name]
        pred = f"{RESERVED_PREFIX}enabled_{action.name}"
        fact = Atom(pred, action.args)
        if pred in self.generated:
            self.init = [a for a in self.init if a != fact]
            return
        self.declare_predicate(pred, op.params)
        guard = Atom(pred, tuple(p.name for p in op.params))
        current = self.actions[action.name]
        self.actions[action.name] = replace(
            current,
            conditions=current.conditions + (TimedCondition(AT_START, guard),
                                             TimedCondition(OVER_ALL, guard)))
        for grounding in action_groundings(self.domain, self.problem, op):
            if grounding != action.args:
                self.init.append(Atom(pred, grounding))

    def clone(self, name: str, action: GroundAction,
              extra_conditions: tuple[TimedCondition, ...] = (),
              extra_effects: tuple[TimedEffect, ...] = (),
              from_entry: bool = True) -> None:
        # from_entry=True copies the body as it was when this question began,
        # so a question's own clone is not blocked by the guard it installs;
        # replacement clones copy the current body instead, which is what
        # makes replacing an action with itself properly contradictory
        op = self.entry_actions[action.name] if from_entry else self.actions[action.name]
        binding = {p.name: v for p, v in zip(op.params, action.args)}
        conds = tuple(TimedCondition(c.when, c.atom.substitute(binding))
                      for c in op.conditions) + extra_conditions
        effs = tuple(TimedEffect(e.when, Literal(e.literal.atom.substitute(binding),
                                                 e.literal.positive))
                     for e in op.effects) + extra_effects
        body = DurativeAction(name, (), op.duration.substitute(binding), conds, effs)
        self.add_clone(name, body, action)

    def emit(self, hmodel: HModel, question: FormalQuestion,
             problem_override: Problem | None = None,
             plan_prefix: tuple[PlanStep, ...] | None = None,
             time_origin: Fraction | None = None) -> HModel:
        domain = replace(self.domain,
                         predicates=tuple(self.predicates),
                         actions=tuple(self.actions.values()))
        if problem_override is not None:
            problem = problem_override
        else:
            problem = replace(self.problem,
                              init=tuple(self.init),
                              tils=tuple(self.tils),
                              goal=tuple(self.goal))
        return HModel(domain, problem,
                      hmodel.provenance + (question,),
                      tuple(self.generated),
                      self.clone_origins,
                      hmodel.plan_prefix if plan_prefix is None else plan_prefix,
                      hmodel.time_origin if time_origin is None else time_origin)


def _check_reserved(hmodel: HModel) -> None:
    names = {p.name for p in hmodel.domain.predicates}
    names |= {a.name for a in hmodel.domain.actions}
    rogue = {n for n in names if n.startswith(RESERVED_PREFIX)} - set(hmodel.generated)
    if rogue:
        raise CompilationError(
            f"model already uses reserved names: {', '.join(sorted(rogue))}")


def compile_question(hmodel: HModel, plan: TimedPlan | None,
                     question: FormalQuestion) -> HModel:
    """Apply one question on top of an HModel (the root HModel wraps the
    untouched original pair). `plan` is the node's plan in absolute time;
    only in-state replacement reads it."""
    _check_reserved(hmodel)
    n = len(hmodel.provenance) + 1
    ws = _Workspace(hmodel)
    kind = question.kind

    if kind == FORBID:
        ws.forbid(question.action_a)
        return ws.emit(hmodel, question)

    if kind == FORCE:
        _compile_force(ws, question.action_a, n)
        return ws.emit(hmodel, question)

    if kind == REPLACE:
        ws.forbid(question.action_a)
        _compile_force(ws, question.action_b, n, from_entry=False)
        return ws.emit(hmodel, question)

    if kind in (ORDER_BEFORE, ORDER_AFTER):
        _compile_order(ws, question.action_a, question.action_b, kind, n)
        return ws.emit(hmodel, question)

    if kind == TIME_WINDOW:
        _compile_window(hmodel, ws, question.action_a, question.window, n)
        return ws.emit(hmodel, question)

    if kind == REPLACE_IN_STATE:
        return _compile_replace_in_state(hmodel, ws, plan, question)

    raise CompilationError(f"unknown question kind {kind!r}")


def _compile_force(ws: _Workspace, action: GroundAction, n: int,
                   from_entry: bool = True) -> None:
    token = f"{RESERVED_PREFIX}forced_{n}"
    ws.declare_predicate(token, ())
    mark = TimedEffect(AT_END, Literal(Atom(token, ()), True))
    ws.clone(f"{RESERVED_PREFIX}force_{action.name}_{n}", action,
             extra_effects=(mark,), from_entry=from_entry)
    ws.goal.append(Literal(Atom(token, ()), True))


def _compile_order(ws: _Workspace, action_a: GroundAction, action_b: GroundAction,
                   kind: str, n: int) -> None:
    token = Atom(f"{RESERVED_PREFIX}ordered_{n}", ())
    ws.declare_predicate(token.predicate, ())
    produce = (TimedEffect(AT_END, Literal(token, True)),)
    # the consumer also re-adds the token at start: starting exactly at the
    # producer's end raises an add-add conflict, and any closer start trips
    # the epsilon rule, so the consumer begins at least epsilon later
    consume_cond = (TimedCondition(AT_START, token),)
    consume_eff = (TimedEffect(AT_START, Literal(token, True)),)
    name_a = f"{RESERVED_PREFIX}ordered_a_{action_a.name}_{n}"
    name_b = f"{RESERVED_PREFIX}ordered_b_{action_b.name}_{n}"
    if kind == ORDER_BEFORE:
        ws.clone(name_b, action_b, extra_effects=produce)
        ws.clone(name_a, action_a, extra_conditions=consume_cond, extra_effects=consume_eff)
    else:
        ws.clone(name_a, action_a, extra_effects=produce)
        ws.clone(name_b, action_b, extra_conditions=consume_cond, extra_effects=consume_eff)
    ws.forbid(action_a)
    ws.forbid(action_b)


def _compile_window(hmodel: HModel, ws: _Workspace, action: GroundAction,
                    window: Window, n: int) -> None:
    lb = window.lb - hmodel.time_origin
    ub = window.ub - hmodel.time_origin
    if ub <= 0:
        raise CompilationError(
            "window ends before this node's timeline begins "
            f"(origin {format_decimal(hmodel.time_origin)})")
    lb = max(lb, Fraction(0))
    token = Atom(f"{RESERVED_PREFIX}in_window_{n}", ())
    ws.declare_predicate(token.predicate, ())
    extra = (TimedCondition(AT_START, token),)
    if window.contained:
        extra += (TimedCondition(OVER_ALL, token),)
    ws.clone(f"{RESERVED_PREFIX}windowed_{action.name}_{n}", action, extra_conditions=extra)
    if lb == 0:
        ws.init.append(token)
    else:
        ws.tils.append(TimedInitialLiteral(lb, Literal(token, True)))
    ws.tils.append(TimedInitialLiteral(ub, Literal(token, False)))
    ws.forbid(action)


def _compile_replace_in_state(hmodel: HModel, ws: _Workspace,
                              plan: TimedPlan | None, question: FormalQuestion) -> HModel:
    if plan is None:
        raise CompilationError("in-state replacement requires the node to have a plan")
    prefix_len = len(hmodel.plan_prefix or ())
    idx = question.occurrence_index
    if idx < prefix_len:
        raise CompilationError(
            f"step {idx} lies in the frozen prefix of an earlier in-state "
            "replacement and cannot be replaced")
    if idx >= len(plan.steps):
        raise CompilationError(
            f"occurrence_index {idx} out of range for a plan of {len(plan.steps)} steps")
    target = plan.steps[idx]
    if target.action.signature != question.action_a.signature:
        raise CompilationError(
            f"step {idx} is {target.action}, not {question.action_a}")

    rel_steps = tuple(PlanStep(s.time - hmodel.time_origin, s.action, s.duration)
                      for s in plan.steps[prefix_len:])
    rel_idx = idx - prefix_len
    proj = project_replace(hmodel.domain, hmodel.problem, TimedPlan(rel_steps),
                           rel_idx, question.action_b)

    problem = replace(hmodel.problem,
                      init=tuple(sorted(proj.initial_state, key=str)),
                      tils=proj.tils,
                      goal=hmodel.problem.goal)
    abs_prefix = (hmodel.plan_prefix or ()) + tuple(
        PlanStep(s.time + hmodel.time_origin, s.action, s.duration) for s in proj.prefix)
    origin = hmodel.time_origin + proj.b_start
    return ws.emit(hmodel, question, problem_override=problem,
                   plan_prefix=abs_prefix, time_origin=origin)


def assemble_hplan(prefix: tuple[PlanStep, ...] | None, suffix: TimedPlan,
                   time_origin: Fraction) -> TimedPlan:
    """Concatenate the frozen absolute-time prefix with the replanned suffix
    shifted out of the projection's relative timeline."""
    shifted = [PlanStep(s.time + time_origin, s.action, s.duration) for s in suffix.steps]
    return TimedPlan(tuple(sort_plan_steps(list(prefix or ()) + shifted)))


def strip_back(hmodel: HModel, plan: TimedPlan) -> TimedPlan:
    """Rename generated clone steps to their original ground actions so the
    plan can be checked against the untouched original model."""
    out = []
    for step in plan.steps:
        name = step.action.name
        if name.startswith(RESERVED_PREFIX):
            origin = hmodel.clone_origins.get(name)
            if origin is None:
                raise CompilationError(f"plan uses an unknown generated action: {name}")
            out.append(PlanStep(step.time, origin, step.duration))
        else:
            out.append(step)
    return TimedPlan(tuple(out))


def find_redundant(domain: Domain, problem: Problem, plan: TimedPlan,
                   focus: GroundAction | None = None) -> list[int]:
    """Indices of steps whose removal, together with the chain of steps whose
    conditions break as a consequence, leaves a valid goal-achieving plan.
    With a focus action, only its occurrences are considered."""
    report = validate(domain, problem, plan)
    if not report.valid:
        raise PddlSemanticError(f"redundancy analysis requires a valid plan: {report.failure}")
    steps = plan.steps
    condition_reasons = (R_START_COND, R_END_COND, R_OVERALL_COND)
    flagged = []
    for i, step in enumerate(steps):
        if focus is not None and step.action.signature != focus.signature:
            continue
        removed = {i}
        while True:
            keep = [j for j in range(len(steps)) if j not in removed]
            sub = TimedPlan(tuple(steps[j] for j in keep))
            rep = validate(domain, problem, sub)
            if rep.valid:
                flagged.append(i)
                break
            failure = rep.failure
            if failure.reason in condition_reasons and failure.step is not None:
                removed.add(keep[failure.step])
                continue
            break
    return flagged


__all__ = [
    "RESERVED_PREFIX", "KINDS",
    "FORBID", "FORCE", "REPLACE", "REPLACE_IN_STATE",
    "ORDER_BEFORE", "ORDER_AFTER", "TIME_WINDOW",
    "Window", "FormalQuestion", "question_from_wire",
    "HModel", "ProjectionResult",
    "compile_question", "project_replace", "assemble_hplan",
    "strip_back", "find_redundant",
]
