"""Native validator for timed plans over the supported PDDL subset.

A plan induces happenings: the sorted distinct time points holding action
start events, action end events and timed initial literals. Simulation per
happening: pairwise mutex check over all events, at-end conditions checked
against the pre-state, end effects and TILs applied, at-start conditions
checked against that intermediate state, start effects applied. Over-all
conditions are checked on the resulting state of every happening inside the
step's half-open interval [start, end). Mutually interfering happenings
closer than epsilon (but not simultaneous) are rejected.

Failures produce a ValidationReport, never an exception; exceptions are
reserved for usage errors (unknown actions, ill-formed input).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import PddlSemanticError
from .model import (
    AT_END,
    AT_START,
    OVER_ALL,
    Atom,
    Domain,
    GroundAction,
    Literal,
    PlanStep,
    Problem,
    TimedInitialLiteral,
    TimedPlan,
    instantiate,
)
from .numbers import EPSILON, TOLERANCE, format_time

START = "action-start"
END = "action-end"
TIL = "til"

R_START_COND = "unsatisfied-start-condition"
R_OVERALL_COND = "unsatisfied-overall-condition"
R_END_COND = "unsatisfied-end-condition"
R_MUTEX = "mutex-violation"
R_EPSILON = "epsilon-violation"
R_DURATION = "duration-mismatch"
R_GOAL = "goal-unsatisfied"


@dataclass(frozen=True)
class Event:
    """One instantaneous event: an action start or end, or a TIL firing."""

    kind: str  # START | END | TIL
    source: int  # step index, or TIL index for TIL events
    label: str
    checks: frozenset[Atom]
    adds: frozenset[Atom]
    dels: frozenset[Atom]


@dataclass(frozen=True)
class Happening:
    time: Fraction
    events: tuple[Event, ...]


@dataclass(frozen=True)
class Failure:
    time: Fraction
    reason: str
    detail: str
    step: int | None = None  # plan step index, when one step is responsible

    def __str__(self) -> str:
        return f"at {format_time(self.time)}: {self.reason}: {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    cost: Fraction | None
    failure: Failure | None
    trace: tuple[tuple[Happening, frozenset[Atom]], ...]

    def to_text(self) -> str:
        if self.valid:
            return f"plan valid, cost {format_time(self.cost or Fraction(0))} (makespan)"
        return f"plan invalid: {self.failure}"

    def to_json(self) -> dict:
        out: dict = {"valid": self.valid}
        out["cost"] = format_time(self.cost) if self.cost is not None else None
        if self.failure is not None:
            out["failure"] = {
                "time": format_time(self.failure.time),
                "reason": self.failure.reason,
                "detail": self.failure.detail,
            }
        else:
            out["failure"] = None
        return out


@dataclass(frozen=True)
class CausalNode:
    kind: str  # "init" | "goal" | "step"
    signature: tuple[str, tuple[str, ...]] | None = None
    ordinal: int = 0  # occurrence number among same-signature steps
    step_index: int | None = None

    def identity(self) -> tuple:
        """Cross-plan identity: step index is plan-local and excluded."""
        return (self.kind, self.signature, self.ordinal)

    def label(self) -> str:
        if self.kind == "step":
            name, args = self.signature or ("?", ())
            body = f"({name} {' '.join(args)})" if args else f"({name})"
            return body if self.ordinal == 0 else f"{body} #{self.ordinal + 1}"
        return self.kind


@dataclass(frozen=True)
class CausalEdge:
    producer: CausalNode
    consumer: CausalNode
    atom: Atom


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[CausalNode, ...]
    edges: tuple[CausalEdge, ...]


def _step_events(domain: Domain, step: PlanStep, index: int) -> tuple[Event, Event, frozenset[Atom]]:
    """Start event, end event and the over-all invariant atoms of a step."""
    schema = domain.action(step.action.name)
    conds, effs = instantiate(schema, step.action.args)
    start_checks = frozenset(c.atom for c in conds if c.when == AT_START)
    end_checks = frozenset(c.atom for c in conds if c.when == AT_END)
    overall = frozenset(c.atom for c in conds if c.when == OVER_ALL)
    start_adds = frozenset(e.literal.atom for e in effs if e.when == AT_START and e.literal.positive)
    start_dels = frozenset(e.literal.atom for e in effs if e.when == AT_START and not e.literal.positive)
    end_adds = frozenset(e.literal.atom for e in effs if e.when == AT_END and e.literal.positive)
    end_dels = frozenset(e.literal.atom for e in effs if e.when == AT_END and not e.literal.positive)
    label = str(step.action)
    start = Event(START, index, label, start_checks, start_adds, start_dels)
    end = Event(END, index, label, end_checks, end_adds, end_dels)
    return start, end, overall


def _til_event(til: TimedInitialLiteral, index: int) -> Event:
    atom = til.literal.atom
    if til.literal.positive:
        return Event(TIL, index, str(til.literal), frozenset(), frozenset({atom}), frozenset())
    return Event(TIL, index, str(til.literal), frozenset(), frozenset(), frozenset({atom}))


def build_happenings(domain: Domain, plan: TimedPlan,
                     tils: tuple[TimedInitialLiteral, ...] = ()) -> list[Happening]:
    """Distinct sorted time points with their events; ends and TILs sort
    before starts within one happening."""
    buckets: dict[Fraction, list[tuple[int, Event]]] = {}
    for i, step in enumerate(plan.steps):
        start, end, _ = _step_events(domain, step, i)
        buckets.setdefault(step.time, []).append((2, start))
        buckets.setdefault(step.time + step.duration, []).append((0, end))
    for j, til in enumerate(tils):
        buckets.setdefault(til.time, []).append((1, _til_event(til, j)))
    happenings = []
    for time in sorted(buckets):
        events = tuple(e for _, e in sorted(buckets[time], key=lambda pair: (pair[0], pair[1].source)))
        happenings.append(Happening(time, events))
    return happenings


def _mutex_pair(a: Event, b: Event) -> Atom | None:
    """Spec conflict rule: a delete against the other's add/check/delete, or
    two adds of the same literal. Add against check is fine (the check is
    evaluated against the proper intermediate state)."""
    for x, y in ((a, b), (b, a)):
        clash = x.dels & (y.adds | y.dels | y.checks)
        if clash:
            return next(iter(clash))
    clash = a.adds & b.adds
    if clash:
        return next(iter(clash))
    return None


def _happening_interferes(a: Happening, b: Happening) -> bool:
    """Cross-happening interference for the epsilon proximity rule."""
    eff_a = frozenset().union(*[e.adds | e.dels for e in a.events]) if a.events else frozenset()
    eff_b = frozenset().union(*[e.adds | e.dels for e in b.events]) if b.events else frozenset()
    touch_a = eff_a.union(*[e.checks for e in a.events]) if a.events else frozenset()
    touch_b = eff_b.union(*[e.checks for e in b.events]) if b.events else frozenset()
    return bool(eff_a & touch_b) or bool(eff_b & touch_a)


class _Simulation:
    """Stepwise execution shared by validate, state_at and causal_links."""

    def __init__(self, domain: Domain, problem: Problem, plan: TimedPlan):
        self.domain = domain
        self.problem = problem
        self.plan = plan
        self.state: set[Atom] = set(problem.init)
        self.failure: Failure | None = None
        self.overall: list[tuple[int, frozenset[Atom]]] = []
        for i, step in enumerate(plan.steps):
            _, _, inv = _step_events(domain, step, i)
            if inv:
                self.overall.append((i, inv))
        self.happenings = build_happenings(domain, plan, problem.tils)

    def _fail(self, time: Fraction, reason: str, detail: str,
              step: int | None = None) -> None:
        if self.failure is None:
            self.failure = Failure(time, reason, detail, step)

    def check_static(self) -> None:
        for i, step in enumerate(self.plan.steps):
            resolved = step.action.duration
            if abs(step.duration - resolved) > TOLERANCE:
                self._fail(step.time, R_DURATION,
                           f"{step.action} declares duration {format_time(step.duration)} "
                           f"but the model resolves it to {format_time(resolved)}",
                           step=i)
                return
        for idx in range(1, len(self.happenings)):
            a, b = self.happenings[idx - 1], self.happenings[idx]
            gap = b.time - a.time
            if 0 < gap < EPSILON and _happening_interferes(a, b):
                self._fail(b.time, R_EPSILON,
                           f"interfering happenings only {format_time(gap)} apart "
                           f"(minimum separation {format_time(EPSILON)})")
                return

    def run(self) -> tuple[tuple[Happening, frozenset[Atom]], ...]:
        trace: list[tuple[Happening, frozenset[Atom]]] = []
        self.check_static()
        if self.failure is not None:
            return tuple(trace)
        for hap in self.happenings:
            post = self._apply(hap)
            if self.failure is not None:
                break
            trace.append((hap, post))
        return tuple(trace)

    def _apply(self, hap: Happening) -> frozenset[Atom]:
        events = hap.events
        for i in range(len(events)):
            for j in range(i + 1, len(events)):
                clash = _mutex_pair(events[i], events[j])
                if clash is not None:
                    self._fail(hap.time, R_MUTEX,
                               f"{events[i].label} and {events[j].label} conflict on {clash}")
                    return frozenset()
        for ev in events:
            if ev.kind == END:
                for atom in sorted(ev.checks, key=str):
                    if atom not in self.state:
                        self._fail(hap.time, R_END_COND, f"{ev.label} requires {atom}",
                                   step=ev.source)
                        return frozenset()
        for ev in events:
            if ev.kind in (END, TIL):
                self.state -= ev.dels
                self.state |= ev.adds
        for ev in events:
            if ev.kind == START:
                for atom in sorted(ev.checks, key=str):
                    if atom not in self.state:
                        self._fail(hap.time, R_START_COND, f"{ev.label} requires {atom}",
                                   step=ev.source)
                        return frozenset()
        for ev in events:
            if ev.kind == START:
                self.state -= ev.dels
                self.state |= ev.adds
        post = frozenset(self.state)
        # invariants hold on every state inside the open execution interval,
        # which is exactly the post-state of happenings in [start, end)
        for idx, inv in self.overall:
            step = self.plan.steps[idx]
            if step.time <= hap.time < step.time + step.duration:
                for atom in sorted(inv, key=str):
                    if atom not in post:
                        self._fail(hap.time, R_OVERALL_COND,
                                   f"{step.action} requires {atom} throughout execution",
                                   step=idx)
                        return post
        return post


def validate(domain: Domain, problem: Problem, plan: TimedPlan) -> ValidationReport:
    sim = _Simulation(domain, problem, plan)
    trace = sim.run()
    if sim.failure is not None:
        return ValidationReport(False, None, sim.failure, trace)
    final = trace[-1][1] if trace else frozenset(problem.init)
    for lit in problem.goal:
        holds = lit.atom in final
        if holds != lit.positive:
            failure = Failure(plan.cost, R_GOAL, f"goal literal {lit} does not hold in the final state")
            return ValidationReport(False, None, failure, trace)
    return ValidationReport(True, plan.cost, None, trace)


def state_at(domain: Domain, problem: Problem, plan: TimedPlan,
             time: Fraction, inclusive: bool = True) -> tuple[frozenset[Atom], list[int]]:
    """State after all happenings at or before `time` (strictly before when
    inclusive=False) plus the indices of steps in flight at `time`
    (start <= time < start + duration). The plan must be valid up to there."""
    sim = _Simulation(domain, problem, plan)
    sim.check_static()
    state = frozenset(problem.init)
    for hap in sim.happenings:
        if hap.time > time or (not inclusive and hap.time == time):
            break
        state = sim._apply(hap)
        if sim.failure is not None:
            break
    if sim.failure is not None and sim.failure.time <= time:
        raise PddlSemanticError(f"plan is invalid before the requested time: {sim.failure}")
    in_flight = [i for i, s in enumerate(plan.steps) if s.time <= time < s.time + s.duration]
    return state, in_flight


def causal_links(domain: Domain, problem: Problem, plan: TimedPlan) -> CausalGraph:
    """Ground causal links under the latest-achiever rule, with init and goal
    pseudo-nodes. The plan must be valid."""
    report = validate(domain, problem, plan)
    if not report.valid:
        raise PddlSemanticError(f"causal links require a valid plan: {report.failure}")

    ordinals: dict[tuple[str, tuple[str, ...]], int] = {}
    step_nodes: list[CausalNode] = []
    for i, step in enumerate(plan.steps):
        sig = step.action.signature
        ordinal = ordinals.get(sig, 0)
        ordinals[sig] = ordinal + 1
        step_nodes.append(CausalNode("step", sig, ordinal, i))
    init_node = CausalNode("init")
    goal_node = CausalNode("goal")

    producer: dict[Atom, CausalNode] = {atom: init_node for atom in problem.init}
    edges: set[CausalEdge] = set()

    def consume(atom: Atom, consumer: CausalNode) -> None:
        edges.add(CausalEdge(producer.get(atom, init_node), consumer, atom))

    overall_by_step = {}
    for i, step in enumerate(plan.steps):
        _, _, inv = _step_events(domain, step, i)
        overall_by_step[i] = inv

    for hap in build_happenings(domain, plan, problem.tils):
        ends = [e for e in hap.events if e.kind == END]
        tils = [e for e in hap.events if e.kind == TIL]
        starts = [e for e in hap.events if e.kind == START]
        for ev in ends:
            for atom in ev.checks:
                consume(atom, step_nodes[ev.source])
        for ev in ends:
            for atom in ev.adds:
                producer[atom] = step_nodes[ev.source]
        for ev in tils:
            for atom in ev.adds:
                # timed facts come from the problem description itself
                producer[atom] = init_node
        for ev in starts:
            node = step_nodes[ev.source]
            for atom in ev.checks:
                consume(atom, node)
            for atom in overall_by_step[ev.source]:
                consume(atom, node)
        for ev in starts:
            for atom in ev.adds:
                producer[atom] = step_nodes[ev.source]

    for lit in problem.goal:
        if lit.positive:
            consume(lit.atom, goal_node)

    nodes = (init_node, *step_nodes, goal_node)
    ordered = sorted(edges, key=lambda e: (str(e.producer.identity()),
                                           str(e.consumer.identity()), str(e.atom)))
    return CausalGraph(nodes, tuple(ordered))


__all__ = [
    "START", "END", "TIL",
    "R_START_COND", "R_OVERALL_COND", "R_END_COND", "R_MUTEX",
    "R_EPSILON", "R_DURATION", "R_GOAL",
    "Event", "Happening", "Failure", "ValidationReport",
    "CausalNode", "CausalEdge", "CausalGraph",
    "build_happenings", "validate", "state_at", "causal_links",
]
