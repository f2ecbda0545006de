"""Seeded random temporal models and plans for property tests.

Two entry points:

    random_model(rng)     -> (Domain, Problem)            free-form, for
                             parse/print round trips
    random_scenario(rng)  -> (Domain, Problem, TimedPlan) courier worlds with
                             a sequential plan that is valid by construction

Scenario plans are built by forward simulation: actions run one after the
other with a gap of at least 0.01 between steps, so no two happenings ever
fall within the validator's epsilon of each other. The goal is sampled from
the state the walk ends in, which makes the walk itself a witness that the
problem is solvable. Everything is driven by the caller's random.Random, so
a seed reproduces the exact same world.
"""

from __future__ import annotations

import random
from fractions import Fraction

from xaip.model import (
    AT_END,
    AT_START,
    OVER_ALL,
    Atom,
    Domain,
    DurationConst,
    DurationFluent,
    DurativeAction,
    FunctionDecl,
    GroundAction,
    Literal,
    Parameter,
    PlanStep,
    Problem,
    PredicateDecl,
    TimedCondition,
    TimedEffect,
    TimedInitialLiteral,
    TimedPlan,
    action_groundings,
    ground_action,
    instantiate,
)

AGENT_TYPES = ["courier", "rover", "drone", "porter"]
PLACE_TYPES = ["site", "dock", "zone", "room"]
ITEM_TYPES = ["crate", "parcel", "box"]
AT_NAMES = ["at", "located", "stationed"]
LINK_NAMES = ["link", "road", "corridor"]
VISIT_NAMES = ["visited", "surveyed", "checked"]
FREE_NAMES = ["idle", "unburdened", "hands_free"]
CARRY_NAMES = ["carrying", "holds"]
STORED_NAMES = ["stored", "placed"]
DIST_NAMES = ["travel_time", "hop_cost", "leg_time"]
MOVE_NAMES = ["move", "goto", "drive", "walk_to"]
SURVEY_NAMES = ["survey", "scan", "inspect"]
PICK_NAMES = ["pick_up", "grab", "collect"]
DROP_NAMES = ["put_down", "stow", "deliver"]


def _decimal(rng: random.Random, lo_cents: int, hi_cents: int) -> Fraction:
    return Fraction(rng.randint(lo_cents, hi_cents), 100)


class _World:
    """Shared vocabulary of one generated model."""

    def __init__(self, rng: random.Random, with_items: bool):
        self.rng = rng
        self.agent_t = rng.choice(AGENT_TYPES)
        self.place_t = rng.choice(PLACE_TYPES)
        self.item_t = rng.choice(ITEM_TYPES)
        self.at = rng.choice(AT_NAMES)
        self.link = rng.choice(LINK_NAMES)
        self.visit = rng.choice(VISIT_NAMES)
        self.free = rng.choice(FREE_NAMES)
        self.carry = rng.choice(CARRY_NAMES)
        self.stored = rng.choice(STORED_NAMES)
        self.dist = rng.choice(DIST_NAMES)
        self.move = rng.choice(MOVE_NAMES)
        self.survey = rng.choice(SURVEY_NAMES)
        self.pick = rng.choice(PICK_NAMES)
        self.drop = rng.choice(DROP_NAMES)
        self.n_agents = rng.randint(1, 2)
        self.n_places = rng.randint(3, 5)
        self.n_items = rng.randint(1, 2) if with_items else 0
        self.agents = [f"{self.agent_t}{i}" for i in range(1, self.n_agents + 1)]
        self.places = [f"{self.place_t}{i}" for i in range(1, self.n_places + 1)]
        self.items = [f"{self.item_t}{i}" for i in range(1, self.n_items + 1)]
        self.fluent_durations = rng.random() < 0.5
        # a ring keeps every place reachable; extra chords vary the graph
        ring = list(zip(self.places, self.places[1:] + self.places[:1]))
        extra = [(a, b) for a in self.places for b in self.places
                 if a != b and (a, b) not in ring and rng.random() < 0.25]
        self.edges = ring + extra


def _build_domain(w: _World, rng: random.Random) -> Domain:
    hierarchy = rng.random() < 0.4
    types: list[tuple[str, str | None]] = []
    if hierarchy:
        types.append((w.agent_t, "mover"))
        types.append(("mover", None))
    else:
        types.append((w.agent_t, None))
    types.append((w.place_t, None))
    if w.items:
        types.append((w.item_t, None))

    a = Parameter("?a", w.agent_t)
    p = Parameter("?p", w.place_t)
    x = Parameter("?x", w.place_t)
    y = Parameter("?y", w.place_t)
    b = Parameter("?b", w.item_t)

    predicates = [
        PredicateDecl(w.at, (a, p)),
        PredicateDecl(w.link, (x, y)),
        PredicateDecl(w.visit, (p,)),
    ]
    if w.items:
        predicates += [
            PredicateDecl(w.free, (a,)),
            PredicateDecl(w.carry, (a, b)),
            PredicateDecl(w.stored, (b, p)),
        ]

    functions: list[FunctionDecl] = []
    if w.fluent_durations:
        functions.append(FunctionDecl(w.dist, (x, y)))

    def cond(when: str, pred: str, *args: str) -> TimedCondition:
        return TimedCondition(when, Atom(pred, args))

    def eff(when: str, positive: bool, pred: str, *args: str) -> TimedEffect:
        return TimedEffect(when, Literal(Atom(pred, args), positive))

    move_duration = (DurationFluent(w.dist, ("?x", "?y")) if w.fluent_durations
                     else DurationConst(_decimal(rng, 50, 300)))
    actions = [
        DurativeAction(
            w.move, (a, x, y), move_duration,
            (cond(AT_START, w.at, "?a", "?x"),
             cond(OVER_ALL, w.link, "?x", "?y")),
            (eff(AT_START, False, w.at, "?a", "?x"),
             eff(AT_END, True, w.at, "?a", "?y"))),
        DurativeAction(
            w.survey, (a, p), DurationConst(_decimal(rng, 25, 200)),
            (cond(AT_START, w.at, "?a", "?p"),
             cond(OVER_ALL, w.at, "?a", "?p")),
            (eff(AT_END, True, w.visit, "?p"),)),
    ]
    if w.items:
        actions.append(DurativeAction(
            w.pick, (a, b, p), DurationConst(_decimal(rng, 25, 150)),
            (cond(AT_START, w.at, "?a", "?p"),
             cond(AT_START, w.stored, "?b", "?p"),
             cond(AT_START, w.free, "?a"),
             cond(OVER_ALL, w.at, "?a", "?p")),
            (eff(AT_START, False, w.stored, "?b", "?p"),
             eff(AT_START, False, w.free, "?a"),
             eff(AT_END, True, w.carry, "?a", "?b"))))
        actions.append(DurativeAction(
            w.drop, (a, b, p), DurationConst(_decimal(rng, 25, 150)),
            (cond(AT_START, w.carry, "?a", "?b"),
             cond(OVER_ALL, w.at, "?a", "?p")),
            (eff(AT_END, False, w.carry, "?a", "?b"),
             eff(AT_END, True, w.stored, "?b", "?p"),
             eff(AT_END, True, w.free, "?a"))))

    requirements = [":typing", ":durative-actions"]
    if functions:
        requirements.append(":fluents")
    name = f"{w.agent_t}_world"
    return Domain(name, tuple(requirements), tuple(types), tuple(predicates),
                  tuple(functions), tuple(actions))


def _build_problem(w: _World, domain: Domain, rng: random.Random) -> Problem:
    objects = ([(o, w.agent_t) for o in w.agents]
               + [(o, w.place_t) for o in w.places]
               + [(o, w.item_t) for o in w.items])

    init: list[Atom] = []
    for agent in w.agents:
        init.append(Atom(w.at, (agent, rng.choice(w.places))))
        if w.items:
            init.append(Atom(w.free, (agent,)))
    for frm, to in w.edges:
        init.append(Atom(w.link, (frm, to)))
    for item in w.items:
        init.append(Atom(w.stored, (item, rng.choice(w.places))))

    function_init: list[tuple[str, tuple[str, ...], Fraction]] = []
    if w.fluent_durations:
        for frm, to in w.edges:
            function_init.append((w.dist, (frm, to), _decimal(rng, 50, 400)))

    # goal is patched in later, once a walk has shown what is reachable
    return Problem(f"{w.agent_t}_errand", domain.name, tuple(objects),
                   tuple(init), tuple(function_init), (), ())


def _sequential_applicable(domain: Domain, state: frozenset[Atom],
                           action: GroundAction) -> frozenset[Atom] | None:
    """Resulting state when `action` can run alone from `state`, else None."""
    conds, effs = instantiate(domain.action(action.name), action.args)
    if any(c.atom not in state for c in conds if c.when == AT_START):
        return None
    during = set(state)
    for e in effs:
        if e.when == AT_START:
            if e.literal.positive:
                during.add(e.literal.atom)
            else:
                during.discard(e.literal.atom)
    if any(c.atom not in during for c in conds if c.when in (OVER_ALL, AT_END)):
        return None
    after = set(during)
    for e in effs:
        if e.when == AT_END:
            if e.literal.positive:
                after.add(e.literal.atom)
            else:
                after.discard(e.literal.atom)
    return frozenset(after)


def all_ground_actions(domain: Domain, problem: Problem) -> list[GroundAction]:
    """Every grounding whose duration resolves, in declaration order."""
    out: list[GroundAction] = []
    for schema in domain.actions:
        for args in action_groundings(domain, problem, schema):
            try:
                out.append(ground_action(domain, problem, schema.name, args))
            except Exception:
                continue  # no duration value for this grounding
    return out


def sequential_plan(domain: Domain, problem: Problem, rng: random.Random,
                    min_steps: int = 3, max_steps: int = 8) -> tuple[TimedPlan, frozenset[Atom]]:
    """Random forward walk; returns the plan and the state it ends in."""
    pool = all_ground_actions(domain, problem)
    state = frozenset(problem.init)
    t = Fraction(0)
    steps: list[PlanStep] = []
    for _ in range(rng.randint(min_steps, max_steps)):
        options = []
        for ga in pool:
            nxt = _sequential_applicable(domain, state, ga)
            if nxt is not None:
                options.append((ga, nxt))
        if not options:
            break
        ga, state = rng.choice(options)
        start = t + _decimal(rng, 1, 50)
        steps.append(PlanStep(start, ga, ga.duration))
        t = start + ga.duration
    return TimedPlan(tuple(steps)), state


def _sample_goal(state: frozenset[Atom], init: tuple[Atom, ...],
                 rng: random.Random) -> tuple[Literal, ...]:
    gained = sorted((a for a in state if a not in init), key=str)
    kept = sorted(state, key=str)
    source = gained if gained else kept
    count = min(len(source), rng.randint(1, 3))
    return tuple(Literal(a, True) for a in rng.sample(source, count))


def random_scenario(rng: random.Random) -> tuple[Domain, Problem, TimedPlan]:
    """A model plus a nonempty sequential plan that reaches the goal."""
    for attempt in range(50):
        sub = random.Random(rng.getrandbits(64))
        w = _World(sub, with_items=sub.random() < 0.6)
        domain = _build_domain(w, sub)
        problem = _build_problem(w, domain, sub)
        plan, final = sequential_plan(domain, problem, sub)
        if len(plan.steps) < 3:
            continue
        goal = _sample_goal(final, problem.init, sub)
        if not goal:
            continue
        problem = Problem(problem.name, problem.domain_name, problem.objects,
                          problem.init, problem.function_init, problem.tils, goal)
        return domain, problem, plan
    raise AssertionError("could not generate a scenario in 50 attempts")


def random_model(rng: random.Random) -> tuple[Domain, Problem]:
    """Free-form model for round-trip checks: TILs anywhere, richer surface."""
    domain, problem, plan = random_scenario(rng)
    tils: list[TimedInitialLiteral] = []
    atoms = sorted({a for a in problem.init} | {g.atom for g in problem.goal}, key=str)
    for _ in range(rng.randint(0, 4)):
        atom = rng.choice(atoms)
        time = Fraction(rng.randint(1, 5000), 100)
        tils.append(TimedInitialLiteral(time, Literal(atom, rng.random() < 0.7)))
    tils.sort(key=lambda t: t.time)
    problem = Problem(problem.name, problem.domain_name, problem.objects,
                      problem.init, problem.function_init, tuple(tils), problem.goal)
    return domain, problem
