"""Typed model of the supported PDDL 2.1 subset.

Supported: typed STRIPS literals, durative actions with at-start / over-all /
at-end conditions and at-start / at-end effects, numeric fluents used only
inside duration expressions, timed initial literals, conjunctive ground goals.
Everything is immutable; compilation builds edited copies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import PddlSemanticError
from .numbers import format_decimal

AT_START = "at start"
AT_END = "at end"
OVER_ALL = "over all"

# root of the type hierarchy; every declared type descends from it
OBJECT = "object"


@dataclass(frozen=True)
class Atom:
    """Ground or lifted predicate application. Args starting with ? are variables."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.args:
            return f"({self.predicate} {' '.join(self.args)})"
        return f"({self.predicate})"

    def substitute(self, binding: dict[str, str]) -> "Atom":
        return Atom(self.predicate, tuple(binding.get(a, a) for a in self.args))

    def is_ground(self) -> bool:
        return not any(a.startswith("?") for a in self.args)


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"

    def substitute(self, binding: dict[str, str]) -> "Literal":
        return Literal(self.atom.substitute(binding), self.positive)

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)


@dataclass(frozen=True)
class TimedCondition:
    """Positive condition attached to a time qualifier of a durative action."""

    when: str  # AT_START | OVER_ALL | AT_END
    atom: Atom

    def substitute(self, binding: dict[str, str]) -> "TimedCondition":
        return TimedCondition(self.when, self.atom.substitute(binding))


@dataclass(frozen=True)
class TimedEffect:
    when: str  # AT_START | AT_END
    literal: Literal

    def substitute(self, binding: dict[str, str]) -> "TimedEffect":
        return TimedEffect(self.when, self.literal.substitute(binding))


@dataclass(frozen=True)
class Parameter:
    name: str
    type: str

    def __str__(self) -> str:
        return f"{self.name} - {self.type}"


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    params: tuple[Parameter, ...] = ()


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple[Parameter, ...] = ()


class DurationExpr:
    """Base of duration expression nodes."""

    def evaluate(self, binding: dict[str, str], fn_values: dict[tuple[str, tuple[str, ...]], Fraction]) -> Fraction:
        raise NotImplementedError

    def substitute(self, binding: dict[str, str]) -> "DurationExpr":
        raise NotImplementedError


@dataclass(frozen=True)
class DurationConst(DurationExpr):
    value: Fraction

    def evaluate(self, binding, fn_values):
        return self.value

    def substitute(self, binding):
        return self

    def __str__(self) -> str:
        return format_decimal(self.value)


@dataclass(frozen=True)
class DurationFluent(DurationExpr):
    function: str
    args: tuple[str, ...]

    def evaluate(self, binding, fn_values):
        args = tuple(binding.get(a, a) for a in self.args)
        key = (self.function, args)
        if key not in fn_values:
            pretty = f"({self.function} {' '.join(args)})" if args else f"({self.function})"
            raise PddlSemanticError(f"duration references uninitialized function {pretty}")
        return fn_values[key]

    def substitute(self, binding):
        return DurationFluent(self.function, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        if self.args:
            return f"({self.function} {' '.join(self.args)})"
        return f"({self.function})"


@dataclass(frozen=True)
class DurationOp(DurationExpr):
    op: str  # + - * /
    left: DurationExpr
    right: DurationExpr

    def evaluate(self, binding, fn_values):
        a = self.left.evaluate(binding, fn_values)
        b = self.right.evaluate(binding, fn_values)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if b == 0:
            raise PddlSemanticError("division by zero in duration expression")
        return a / b

    def substitute(self, binding):
        return DurationOp(self.op, self.left.substitute(binding), self.right.substitute(binding))

    def __str__(self) -> str:
        return f"({self.op} {self.left} {self.right})"


@dataclass(frozen=True)
class DurativeAction:
    name: str
    params: tuple[Parameter, ...]
    duration: DurationExpr
    conditions: tuple[TimedCondition, ...]
    effects: tuple[TimedEffect, ...]

    def conditions_at(self, when: str) -> tuple[Atom, ...]:
        return tuple(c.atom for c in self.conditions if c.when == when)

    def effects_at(self, when: str) -> tuple[Literal, ...]:
        return tuple(e.literal for e in self.effects if e.when == when)


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...]
    # (type name, parent name or None meaning "object"), declaration order
    types: tuple[tuple[str, str | None], ...]
    predicates: tuple[PredicateDecl, ...]
    functions: tuple[FunctionDecl, ...]
    actions: tuple[DurativeAction, ...]

    def type_names(self) -> set[str]:
        return {t for t, _ in self.types} | {OBJECT}

    def conforms(self, concrete: str, wanted: str) -> bool:
        """True when an object of type `concrete` fits a parameter of type `wanted`."""
        if wanted == OBJECT:
            return True
        parents = dict(self.types)
        seen = set()
        cur: str | None = concrete
        while cur is not None and cur not in seen:
            if cur == wanted:
                return True
            seen.add(cur)
            cur = parents.get(cur)
        return False

    def predicate(self, name: str) -> PredicateDecl:
        for p in self.predicates:
            if p.name == name:
                return p
        raise PddlSemanticError(f"unknown predicate {name!r}")

    def function(self, name: str) -> FunctionDecl:
        for f in self.functions:
            if f.name == name:
                return f
        raise PddlSemanticError(f"unknown function {name!r}")

    def action(self, name: str) -> DurativeAction:
        for a in self.actions:
            if a.name == name:
                return a
        raise PddlSemanticError(f"unknown action {name!r}")

    def has_action(self, name: str) -> bool:
        return any(a.name == name for a in self.actions)


@dataclass(frozen=True)
class TimedInitialLiteral:
    time: Fraction
    literal: Literal


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # (object name, type), declaration order
    init: tuple[Atom, ...]
    function_init: tuple[tuple[str, tuple[str, ...], Fraction], ...]
    tils: tuple[TimedInitialLiteral, ...]
    goal: tuple[Literal, ...]

    def object_type(self, name: str) -> str:
        for obj, typ in self.objects:
            if obj == name:
                return typ
        raise PddlSemanticError(f"unknown object {name!r}")

    def has_object(self, name: str) -> bool:
        return any(obj == name for obj, _ in self.objects)

    def objects_of_type(self, domain: Domain, wanted: str) -> list[str]:
        return [obj for obj, typ in self.objects if domain.conforms(typ, wanted)]

    def function_values(self) -> dict[tuple[str, tuple[str, ...]], Fraction]:
        return {(name, args): value for name, args, value in self.function_init}


@dataclass(frozen=True)
class GroundAction:
    """A fully instantiated action with its duration resolved against the problem."""

    name: str
    args: tuple[str, ...]
    duration: Fraction

    @property
    def signature(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.args)

    def __str__(self) -> str:
        if self.args:
            return f"({self.name} {' '.join(self.args)})"
        return f"({self.name})"


@dataclass(frozen=True)
class PlanStep:
    time: Fraction
    action: GroundAction
    duration: Fraction

    @property
    def end(self) -> Fraction:
        return self.time + self.duration


@dataclass(frozen=True)
class TimedPlan:
    steps: tuple[PlanStep, ...] = ()

    @property
    def cost(self) -> Fraction:
        """Makespan: latest step end, 0 for the empty plan."""
        if not self.steps:
            return Fraction(0)
        return max(s.end for s in self.steps)

    def __len__(self) -> int:
        return len(self.steps)


def check_atom(domain: Domain, problem: Problem | None, atom: Atom,
               param_types: dict[str, str] | None = None) -> None:
    """Arity and type check for one atom; variables resolved via param_types."""
    decl = domain.predicate(atom.predicate)
    if len(atom.args) != len(decl.params):
        raise PddlSemanticError(
            f"predicate {atom.predicate!r} expects {len(decl.params)} arguments, got {len(atom.args)} in {atom}")
    for arg, param in zip(atom.args, decl.params):
        if arg.startswith("?"):
            if param_types is None or arg not in param_types:
                raise PddlSemanticError(f"unbound variable {arg} in {atom}")
            arg_type = param_types[arg]
        else:
            if problem is None:
                raise PddlSemanticError(f"constant {arg!r} used without a problem context in {atom}")
            arg_type = problem.object_type(arg)
        if not domain.conforms(arg_type, param.type):
            raise PddlSemanticError(
                f"argument {arg!r} of type {arg_type!r} does not fit parameter "
                f"{param.name} - {param.type} of predicate {atom.predicate!r}")


def ground_action(domain: Domain, problem: Problem, name: str, args: tuple[str, ...]) -> GroundAction:
    """Instantiate an action schema with objects; resolves the duration."""
    schema = domain.action(name)
    if len(args) != len(schema.params):
        raise PddlSemanticError(
            f"action {name!r} expects {len(schema.params)} arguments, got {len(args)}")
    binding: dict[str, str] = {}
    for param, arg in zip(schema.params, args):
        obj_type = problem.object_type(arg)
        if not domain.conforms(obj_type, param.type):
            raise PddlSemanticError(
                f"argument {arg!r} of type {obj_type!r} does not fit parameter "
                f"{param.name} - {param.type} of action {name!r}")
        binding[param.name] = arg
    duration = schema.duration.evaluate(binding, problem.function_values())
    if duration <= 0:
        raise PddlSemanticError(f"action ({name} {' '.join(args)}) has non-positive duration {duration}")
    return GroundAction(name, tuple(args), duration)


def action_groundings(domain: Domain, problem: Problem, schema: DurativeAction) -> list[tuple[str, ...]]:
    """All type-correct argument tuples for a schema, in object declaration order."""
    pools = [problem.objects_of_type(domain, p.type) for p in schema.params]
    results: list[tuple[str, ...]] = []

    def rec(i: int, acc: list[str]) -> None:
        if i == len(pools):
            results.append(tuple(acc))
            return
        for obj in pools[i]:
            acc.append(obj)
            rec(i + 1, acc)
            acc.pop()

    rec(0, [])
    return results


def instantiate(schema: DurativeAction, args: tuple[str, ...]) -> tuple[
        tuple[TimedCondition, ...], tuple[TimedEffect, ...]]:
    """Conditions and effects of a schema under a full binding."""
    binding = {p.name: a for p, a in zip(schema.params, args)}
    conds = tuple(c.substitute(binding) for c in schema.conditions)
    effs = tuple(e.substitute(binding) for e in schema.effects)
    return conds, effs


def sort_plan_steps(steps: list[PlanStep]) -> tuple[PlanStep, ...]:
    """Stable sort by start time; ties keep input (textual) order."""
    return tuple(sorted(steps, key=lambda s: s.time))


__all__ = [
    "AT_START", "AT_END", "OVER_ALL", "OBJECT",
    "Atom", "Literal", "TimedCondition", "TimedEffect", "Parameter",
    "PredicateDecl", "FunctionDecl",
    "DurationExpr", "DurationConst", "DurationFluent", "DurationOp",
    "DurativeAction", "Domain", "TimedInitialLiteral", "Problem",
    "GroundAction", "PlanStep", "TimedPlan",
    "check_atom", "ground_action", "action_groundings", "instantiate",
    "sort_plan_steps", "replace", "field",
]
