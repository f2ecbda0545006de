"""Built-in satisficing temporal planner.

Decision-epoch forward search over bitmask states.  A state is the set of
true facts, the current time, the queue of executing actions (with their
scheduled end times), and the suffix of pending timed initial literals.
Successors either start an applicable ground action at the current time or
advance time to the next event (an action end or a TIL).  The search is
greedy on the number of unsatisfied goal literals, breaking ties by the
additive relaxed cost of the remaining goals and then by insertion order,
which follows lexicographic ground action order within each expansion.
The first plan found is returned; it is satisficing, not optimal.

Restrictions beyond the validated semantics: a ground action is never
started while an identical instance of it is still executing, and actions
start only at event epochs or one epsilon after one.  Plans needing tighter
interleavings are out of reach of this planner, not invalid.
"""

from __future__ import annotations

import heapq
import itertools
import threading
import time as _wallclock
from collections.abc import Sequence
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
    PlanStep,
    Problem,
    TimedPlan,
    action_groundings,
    ground_action,
    instantiate,
    sort_plan_steps,
)
from .numbers import EPSILON

PLAN_FOUND = "plan-found"
UNSOLVABLE = "unsolvable"
TIMEOUT = "timeout"
PLANNER_ERROR = "planner-error"


@dataclass(frozen=True)
class SearchLimits:
    max_expanded_states: int = 400_000
    max_objects: int = 64


@dataclass(frozen=True)
class SearchResult:
    status: str
    plan: TimedPlan | None
    expansions: int
    elapsed: float
    message: str


@dataclass(frozen=True)
class _Ground:
    """One ground action with all condition/effect sets interned as bitmasks."""

    action: GroundAction
    start_pre: int
    overall: int
    end_pre: int
    start_add: int
    start_del: int
    end_add: int
    end_del: int
    relax_pre: int
    relax_add: int


class _Interner:
    def __init__(self) -> None:
        self._bits: dict[Atom, int] = {}

    def bit(self, atom: Atom) -> int:
        got = self._bits.get(atom)
        if got is None:
            got = 1 << len(self._bits)
            self._bits[atom] = got
        return got

    def mask(self, atoms) -> int:
        m = 0
        for a in atoms:
            m |= self.bit(a)
        return m


def _ground_all(domain: Domain, problem: Problem, interner: _Interner) -> list[_Ground]:
    out: list[_Ground] = []
    for schema in sorted(domain.actions, key=lambda a: a.name):
        for args in sorted(action_groundings(domain, problem, schema)):
            try:
                ga = ground_action(domain, problem, schema.name, args)
            except PddlSemanticError:
                # unresolvable or non-positive duration: grounding unusable
                continue
            conds, effs = instantiate(schema, args)
            start_pre = interner.mask(c.atom for c in conds if c.when == AT_START)
            overall = interner.mask(c.atom for c in conds if c.when == OVER_ALL)
            end_pre = interner.mask(c.atom for c in conds if c.when == AT_END)
            start_add = interner.mask(e.literal.atom for e in effs if e.when == AT_START and e.literal.positive)
            start_del = interner.mask(e.literal.atom for e in effs if e.when == AT_START and not e.literal.positive)
            end_add = interner.mask(e.literal.atom for e in effs if e.when == AT_END and e.literal.positive)
            end_del = interner.mask(e.literal.atom for e in effs if e.when == AT_END and not e.literal.positive)
            out.append(_Ground(
                action=ga,
                start_pre=start_pre, overall=overall, end_pre=end_pre,
                start_add=start_add, start_del=start_del,
                end_add=end_add, end_del=end_del,
                relax_pre=start_pre | overall | end_pre,
                relax_add=start_add | end_add,
            ))
    return out


def _conflict(c1: int, a1: int, d1: int, c2: int, a2: int, d2: int) -> bool:
    """Same-instant interference between two events (add-add included)."""
    return bool((d1 & (c2 | a2 | d2)) or (d2 & (c1 | a1 | d1)) or (a1 & a2))


def _relaxed_reachable(init: int, til_adds: int, grounds: list[_Ground]) -> int:
    reach = init | til_adds
    pending = list(grounds)
    changed = True
    while changed:
        changed = False
        rest: list[_Ground] = []
        for g in pending:
            if g.relax_pre & ~reach:
                rest.append(g)
            elif g.relax_add & ~reach:
                reach |= g.relax_add
                changed = True
            # fully applied groundings drop out of the worklist
        pending = rest
    return reach


def run_search(domain: Domain, problem: Problem, *,
               limits: SearchLimits | None = None,
               timeout: float | None = None,
               cancel: threading.Event | None = None,
               now_events: Sequence[tuple[tuple[Atom, ...], tuple[Atom, ...], tuple[Atom, ...]]] = (),
               hold_until: Sequence[tuple[Fraction, tuple[Atom, ...]]] = ()) -> SearchResult:
    """Search for a plan; returns a status, never raises on unsolvable input.

    now_events and hold_until exist for planning the tail of a spliced plan:
    when time 0 of the problem coincides with events of a frozen plan prefix,
    now_events lists those events as (checked, added, deleted) atom tuples so
    same-instant interference is avoided, and hold_until lists (time, atoms)
    invariant windows of still-executing prefix actions that no new action may
    delete before the given time.
    """
    limits = limits or SearchLimits()
    started = _wallclock.monotonic()
    deadline = None if timeout is None else started + timeout

    if len(problem.objects) > limits.max_objects:
        return SearchResult(
            PLANNER_ERROR, None, 0, 0.0,
            f"problem has {len(problem.objects)} objects, over the builtin limit of {limits.max_objects}")

    interner = _Interner()
    init_mask = interner.mask(problem.init)
    tils: list[tuple[Fraction, int, int]] = []
    for til in sorted(problem.tils, key=lambda t: t.time):
        if til.literal.positive:
            tils.append((til.time, interner.bit(til.literal.atom), 0))
        else:
            tils.append((til.time, 0, interner.bit(til.literal.atom)))
    goal_pos = interner.mask(lit.atom for lit in problem.goal if lit.positive)
    goal_neg = interner.mask(lit.atom for lit in problem.goal if not lit.positive)
    occupied = tuple((interner.mask(c), interner.mask(a), interner.mask(d))
                     for c, a, d in now_events)
    locks = tuple(sorted((t, interner.mask(atoms)) for t, atoms in hold_until))

    grounds = _ground_all(domain, problem, interner)
    reach = _relaxed_reachable(init_mask, sum(a for _, a, _ in tils), grounds)
    if goal_pos & ~reach:
        return SearchResult(
            UNSOLVABLE, None, 0, _wallclock.monotonic() - started,
            "goal unreachable even under delete relaxation")
    grounds = [g for g in grounds if not (g.relax_pre & ~reach)]

    def heuristic(facts: int) -> int:
        return bin(goal_pos & ~facts).count("1") + bin(goal_neg & facts).count("1")

    nbits = len(interner._bits)
    goal_idx = [i for i in range(nbits) if goal_pos >> i & 1]
    til_add_suffix = [0] * (len(tils) + 1)
    for i in range(len(tils) - 1, -1, -1):
        til_add_suffix[i] = til_add_suffix[i + 1] | tils[i][1]
    # per-ground atom index lists for the additive cost fixpoint
    pre_idx = [tuple(i for i in range(nbits) if g.relax_pre >> i & 1) for g in grounds]
    add_idx = [tuple(i for i in range(nbits) if g.relax_add >> i & 1) for g in grounds]
    INF = float("inf")
    relax_cache: dict[int, int | None] = {}

    def relaxed_cost(seed: int) -> int | None:
        """Additive relaxed cost of the unmet goal atoms; None if unreachable."""
        if seed in relax_cache:
            return relax_cache[seed]
        costs = [0 if seed >> i & 1 else INF for i in range(nbits)]
        changed = True
        while changed:
            changed = False
            for pres, adds in zip(pre_idx, add_idx):
                total = 1
                for i in pres:
                    c = costs[i]
                    if c is INF:
                        total = INF
                        break
                    total += c
                if total is not INF:
                    for i in adds:
                        if total < costs[i]:
                            costs[i] = total
                            changed = True
        got: float | None = 0
        for i in goal_idx:
            c = costs[i]
            if c is INF:
                got = None
                break
            got += c
        relax_cache[seed] = got
        return got

    def fold_tils(facts: int, til_idx: int) -> int:
        for _, add, dele in tils[til_idx:]:
            facts = (facts & ~dele) | add
        return facts

    # state: (facts, time, executing, til_idx, now, dwelled)
    #   executing: sorted tuple of (end_time, ground index)
    #   now: tuple of (checks, adds, dels) already applied at this exact time
    #   dwelled: this epoch is the epsilon shadow of the previous one
    empty: tuple = ()
    start_state = (init_mask, Fraction(0), empty, 0, occupied, False)

    def dedup_key(state) -> tuple:
        facts, t, executing, til_idx, now, dwelled = state
        return (
            facts,
            tuple((e - t, g) for e, g in executing),
            tuple(tt - t for tt, _, _ in tils[til_idx:]),
            tuple(sorted(now)),
            dwelled,
        )

    seq = itertools.count()
    heap: list[tuple[int, int, int, tuple, tuple | None]] = []
    seen: set[tuple] = {dedup_key(start_state)}
    root_relax = relaxed_cost(init_mask | til_add_suffix[0])
    if root_relax is not None:
        heapq.heappush(heap, (heuristic(init_mask), root_relax, next(seq), start_state, None))
    expansions = 0

    def push(state, steps) -> None:
        key = dedup_key(state)
        if key in seen:
            return
        seen.add(key)
        facts, _, executing, til_idx, _, _ = state
        seed = facts | til_add_suffix[til_idx]
        for _, g in executing:
            seed |= grounds[g].end_add
        relax = relaxed_cost(seed)
        if relax is None:
            return
        heapq.heappush(heap, (heuristic(facts), relax, next(seq), state, steps))

    while heap:
        if deadline is not None and _wallclock.monotonic() > deadline:
            return SearchResult(TIMEOUT, None, expansions,
                                _wallclock.monotonic() - started, "wall clock limit reached")
        if cancel is not None and cancel.is_set():
            return SearchResult(TIMEOUT, None, expansions,
                                _wallclock.monotonic() - started, "cancelled")
        if expansions >= limits.max_expanded_states:
            return SearchResult(TIMEOUT, None, expansions,
                                _wallclock.monotonic() - started,
                                f"expanded {expansions} states, over the limit")

        _, _, _, state, steps = heapq.heappop(heap)
        facts, now_t, executing, til_idx, now, dwelled = state
        expansions += 1

        if not executing:
            final = fold_tils(facts, til_idx)
            if not (goal_pos & ~final) and not (goal_neg & final):
                plan_steps: list[PlanStep] = []
                node = steps
                while node is not None:
                    t, g = node[0]
                    ga = grounds[g].action
                    plan_steps.append(PlanStep(t, ga, ga.duration))
                    node = node[1]
                plan_steps.reverse()
                plan = TimedPlan(sort_plan_steps(plan_steps))
                return SearchResult(PLAN_FOUND, plan, expansions,
                                    _wallclock.monotonic() - started,
                                    f"found a plan after {expansions} expansions")

        # next event time: earliest executing end or pending TIL
        next_event: Fraction | None = None
        if executing:
            next_event = executing[0][0]
        if til_idx < len(tils) and (next_event is None or tils[til_idx][0] < next_event):
            next_event = tils[til_idx][0]

        # successor 1: advance to the next event and apply everything there
        if next_event is not None:
            events: list[tuple[int, int, int]] = []
            rest_exec = []
            ends_ok = True
            for e, g in executing:
                if e == next_event:
                    gr = grounds[g]
                    if gr.end_pre & ~facts:
                        ends_ok = False
                        break
                    events.append((gr.end_pre, gr.end_add, gr.end_del))
                else:
                    rest_exec.append((e, g))
            new_til_idx = til_idx
            if ends_ok:
                while new_til_idx < len(tils) and tils[new_til_idx][0] == next_event:
                    _, a, d = tils[new_til_idx]
                    events.append((0, a, d))
                    new_til_idx += 1
                for i in range(len(events)):
                    if not ends_ok:
                        break
                    for j in range(i + 1, len(events)):
                        if _conflict(*events[i], *events[j]):
                            ends_ok = False
                            break
            if ends_ok:
                total_add = total_del = 0
                for _, a, d in events:
                    total_add |= a
                    total_del |= d
                f2 = (facts & ~total_del) | total_add
                invariants = 0
                for _, g in rest_exec:
                    invariants |= grounds[g].overall
                if not (invariants & ~f2):
                    push((f2, next_event, tuple(rest_exec), new_til_idx, tuple(events), False), steps)

        # successor 2: wait out the epsilon separation after this epoch's events
        if now and not dwelled:
            t2 = now_t + EPSILON
            if next_event is None or t2 < next_event:
                push((facts, t2, executing, til_idx, empty, True), steps)

        # successor 3: start an applicable ground action now
        running = {g for _, g in executing}
        exec_invariants = 0
        for _, g in executing:
            exec_invariants |= grounds[g].overall
        for gi, gr in enumerate(grounds):
            if gi in running or gr.start_pre & ~facts:
                continue
            f2 = (facts & ~gr.start_del) | gr.start_add
            if (gr.overall | exec_invariants) & ~f2:
                continue
            if any(_conflict(gr.start_pre, gr.start_add, gr.start_del, *ev) for ev in now):
                continue
            end_t = now_t + gr.action.duration
            if any(now_t < lt and (gr.start_del & lm or (end_t < lt and gr.end_del & lm))
                   for lt, lm in locks):
                continue
            clash = False
            for e, g in executing:
                if e == end_t and _conflict(gr.end_pre, gr.end_add, gr.end_del,
                                            grounds[g].end_pre, grounds[g].end_add, grounds[g].end_del):
                    clash = True
                    break
            if not clash:
                for tt, a, d in tils[til_idx:]:
                    if tt > end_t:
                        break
                    if tt == end_t and _conflict(gr.end_pre, gr.end_add, gr.end_del, 0, a, d):
                        clash = True
                        break
            if clash:
                continue
            new_exec = tuple(sorted(executing + ((end_t, gi),)))
            new_now = now + ((gr.start_pre, gr.start_add, gr.start_del),)
            push((f2, now_t, new_exec, til_idx, new_now, dwelled), ((now_t, gi), steps))

    return SearchResult(UNSOLVABLE, None, expansions,
                        _wallclock.monotonic() - started,
                        f"exhausted the reachable state space after {expansions} expansions")


__all__ = [
    "PLAN_FOUND", "UNSOLVABLE", "TIMEOUT", "PLANNER_ERROR",
    "SearchLimits", "SearchResult", "run_search",
]
