"""Deterministic PDDL and plan printing.

print(parse(text)) followed by parse gives a structurally equal model:
declaration order is preserved and generated constructs append at the end.
"""

from __future__ import annotations

from .model import (
    AT_END,
    AT_START,
    OVER_ALL,
    Atom,
    Domain,
    DurativeAction,
    Literal,
    Parameter,
    Problem,
    TimedPlan,
)
from .numbers import format_decimal, format_time


def _typed_names(pairs: list[tuple[str, str | None]]) -> str:
    """Group consecutive runs sharing a type: `?a ?b - t ?c - u d`."""
    chunks: list[str] = []
    run: list[str] = []
    run_type: str | None = None
    started = False

    def flush() -> None:
        if not run:
            return
        if run_type is None:
            chunks.append(" ".join(run))
        else:
            chunks.append(f"{' '.join(run)} - {run_type}")

    for name, typ in pairs:
        if started and typ != run_type:
            flush()
            run = []
        run.append(name)
        run_type = typ
        started = True
    flush()
    return " ".join(chunks)


def _params(params: tuple[Parameter, ...]) -> str:
    return _typed_names([(p.name, p.type) for p in params])


def _literal(lit: Literal) -> str:
    return str(lit)


def _timed_condition(when: str, atom: Atom) -> str:
    return f"({when} {atom})"


def print_domain(domain: Domain) -> str:
    lines: list[str] = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append(f"  (:requirements {' '.join(domain.requirements)})")
    if domain.types:
        lines.append("  (:types")
        # one run per parent change keeps declaration order intact
        run: list[str] = []
        run_parent: str | None = None
        started = False
        for tname, parent in domain.types:
            if started and parent != run_parent:
                lines.append(f"    {_typed_names([(n, run_parent) for n in run])}")
                run = []
            run.append(tname)
            run_parent = parent
            started = True
        if run:
            lines.append(f"    {_typed_names([(n, run_parent) for n in run])}")
        lines[-1] += ")"
    if domain.predicates:
        lines.append("  (:predicates")
        for pred in domain.predicates:
            body = f"{pred.name} {_params(pred.params)}".strip()
            lines.append(f"    ({body})")
        lines[-1] += ")"
    if domain.functions:
        lines.append("  (:functions")
        for fn in domain.functions:
            body = f"{fn.name} {_params(fn.params)}".strip()
            lines.append(f"    ({body})")
        lines[-1] += ")"
    for action in domain.actions:
        lines.append(_print_action(action))
    lines.append(")")
    return "\n".join(lines) + "\n"


def _print_action(action: DurativeAction) -> str:
    lines = [f"  (:durative-action {action.name}"]
    lines.append(f"    :parameters ({_params(action.params)})")
    lines.append(f"    :duration (= ?duration {action.duration})")
    if action.conditions:
        lines.append("    :condition (and")
        for cond in action.conditions:
            lines.append(f"      {_timed_condition(cond.when, cond.atom)}")
        lines[-1] += ")"
    lines.append("    :effect (and")
    for eff in action.effects:
        lines.append(f"      ({eff.when} {_literal(eff.literal)})")
    lines[-1] += "))"
    return "\n".join(lines)


def print_problem(problem: Problem) -> str:
    lines: list[str] = [f"(define (problem {problem.name})",
                        f"  (:domain {problem.domain_name})"]
    if problem.objects:
        lines.append("  (:objects")
        run: list[str] = []
        run_type: str | None = None
        started = False
        for obj, typ in problem.objects:
            if started and typ != run_type:
                lines.append(f"    {_typed_names([(n, run_type) for n in run])}")
                run = []
            run.append(obj)
            run_type = typ
            started = True
        if run:
            lines.append(f"    {_typed_names([(n, run_type) for n in run])}")
        lines[-1] += ")"
    lines.append("  (:init")
    for atom in problem.init:
        lines.append(f"    {atom}")
    for fname, fargs, value in problem.function_init:
        app = f"({fname} {' '.join(fargs)})" if fargs else f"({fname})"
        lines.append(f"    (= {app} {format_decimal(value)})")
    for til in problem.tils:
        lines.append(f"    (at {format_time(til.time)} {_literal(til.literal)})")
    lines[-1] += ")"
    if problem.goal:
        lines.append("  (:goal (and")
        for lit in problem.goal:
            lines.append(f"    {_literal(lit)}")
        lines[-1] += "))"
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_model(domain: Domain, problem: Problem) -> tuple[str, str]:
    return print_domain(domain), print_problem(problem)


def print_plan(plan: TimedPlan) -> str:
    lines = [f"{format_time(s.time)}: {s.action} [{format_time(s.duration)}]"
             for s in plan.steps]
    return "\n".join(lines) + ("\n" if lines else "")


__all__ = ["print_domain", "print_problem", "print_model", "print_plan"]
