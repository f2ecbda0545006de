"""Parsers for the supported PDDL subset and for timed plan files.

Two stages: a tokenizer that keeps line/column positions, then a reader that
builds nested s-expressions, then interpretation. Constructs outside the
subset (conditional effects, quantifiers, derived predicates, continuous
effects, negative conditions, metrics, non-durative actions) are rejected
loudly with their source position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    PddlSemanticError,
    PddlSyntaxError,
    PlanFormatError,
    UnsupportedConstructError,
)
from .model import (
    AT_END,
    AT_START,
    OVER_ALL,
    Atom,
    Domain,
    DurationConst,
    DurationExpr,
    DurationFluent,
    DurationOp,
    DurativeAction,
    FunctionDecl,
    Literal,
    Parameter,
    PlanStep,
    PredicateDecl,
    Problem,
    TimedCondition,
    TimedEffect,
    TimedInitialLiteral,
    TimedPlan,
    check_atom,
    ground_action,
    sort_plan_steps,
)
from .numbers import _DECIMAL_RE, parse_decimal

_UNSUPPORTED_TOPLEVEL = {
    ":action": "non-durative action (:action)",
    ":derived": "derived predicate (:derived)",
    ":constants": "domain constants (:constants)",
    ":axioms": "axioms",
    ":constraints": "constraints block (:constraints)",
}

_UNSUPPORTED_FORMS = {
    "when": "conditional effect (when)",
    "forall": "universal quantifier (forall)",
    "exists": "existential quantifier (exists)",
    "imply": "implication (imply)",
    "or": "disjunction (or)",
    "increase": "numeric effect (increase)",
    "decrease": "numeric effect (decrease)",
    "assign": "numeric effect (assign)",
    "scale-up": "numeric effect (scale-up)",
    "scale-down": "numeric effect (scale-down)",
}


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SExpr:
    """Either a symbol leaf or a list node, both carrying a source position."""

    items: "tuple[SExpr, ...] | None"
    symbol: str | None
    line: int
    column: int

    @property
    def is_list(self) -> bool:
        return self.items is not None


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(Token(ch, line, col))
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i], line, start_col))
    return tokens


def read_sexprs(text: str) -> list[SExpr]:
    tokens = tokenize(text)
    pos = 0

    def read() -> SExpr:
        nonlocal pos
        tok = tokens[pos]
        if tok.text == ")":
            raise PddlSyntaxError("unexpected ')'", tok.line, tok.column)
        if tok.text == "(":
            pos += 1
            items: list[SExpr] = []
            while True:
                if pos >= len(tokens):
                    raise PddlSyntaxError("unbalanced '(': reached end of input", tok.line, tok.column)
                if tokens[pos].text == ")":
                    pos += 1
                    return SExpr(tuple(items), None, tok.line, tok.column)
                items.append(read())
        pos += 1
        return SExpr(None, tok.text, tok.line, tok.column)

    out: list[SExpr] = []
    while pos < len(tokens):
        out.append(read())
    return out


def _expect_symbol(node: SExpr, what: str) -> str:
    if node.is_list or node.symbol is None:
        raise PddlSyntaxError(f"expected {what}, got a list", node.line, node.column)
    return node.symbol


def _expect_list(node: SExpr, what: str) -> tuple[SExpr, ...]:
    if not node.is_list:
        raise PddlSyntaxError(f"expected {what}, got {node.symbol!r}", node.line, node.column)
    return node.items or ()


def _head(node: SExpr) -> str:
    items = _expect_list(node, "a parenthesized form")
    if not items:
        raise PddlSyntaxError("empty form", node.line, node.column)
    return _expect_symbol(items[0], "a form head")


def _parse_typed_list(items: tuple[SExpr, ...], default_type: str) -> list[tuple[str, str]]:
    """Parse `a b - t c d - u e` into [(a,t),(b,t),(c,u),(d,u),(e,default)]."""
    out: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(items):
        sym = _expect_symbol(items[i], "a name in a typed list")
        if sym == "-":
            if i + 1 >= len(items):
                raise PddlSyntaxError("dangling '-' in typed list", items[i].line, items[i].column)
            typ = _expect_symbol(items[i + 1], "a type name")
            if not pending:
                raise PddlSyntaxError("type with no names before it", items[i].line, items[i].column)
            out.extend((name, typ) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(sym)
            i += 1
    out.extend((name, default_type) for name in pending)
    return out


def _parse_atom(node: SExpr) -> Atom:
    items = _expect_list(node, "an atom")
    if not items:
        raise PddlSyntaxError("empty atom", node.line, node.column)
    name = _expect_symbol(items[0], "a predicate name")
    if name in _UNSUPPORTED_FORMS:
        raise UnsupportedConstructError(_UNSUPPORTED_FORMS[name], node.line, node.column)
    args = tuple(_expect_symbol(a, "an atom argument") for a in items[1:])
    return Atom(name, args)


def _parse_literal(node: SExpr) -> Literal:
    items = _expect_list(node, "a literal")
    if items and not items[0].is_list and items[0].symbol == "not":
        if len(items) != 2:
            raise PddlSyntaxError("(not ...) takes exactly one atom", node.line, node.column)
        return Literal(_parse_atom(items[1]), positive=False)
    return Literal(_parse_atom(node), positive=True)


def _parse_duration_expr(node: SExpr) -> DurationExpr:
    if not node.is_list:
        sym = node.symbol or ""
        if _DECIMAL_RE.match(sym):
            return DurationConst(parse_decimal(sym))
        raise PddlSyntaxError(f"expected a number or fluent in duration, got {sym!r}",
                              node.line, node.column)
    items = node.items or ()
    if not items:
        raise PddlSyntaxError("empty duration expression", node.line, node.column)
    head = _expect_symbol(items[0], "a duration operator or function")
    if head in ("+", "-", "*", "/"):
        if len(items) != 3:
            raise PddlSyntaxError(f"duration operator {head!r} takes two operands",
                                  node.line, node.column)
        return DurationOp(head, _parse_duration_expr(items[1]), _parse_duration_expr(items[2]))
    args = tuple(_expect_symbol(a, "a fluent argument") for a in items[1:])
    return DurationFluent(head, args)


def _parse_duration(node: SExpr, action: str) -> DurationExpr:
    items = _expect_list(node, ":duration")
    if items and not items[0].is_list and items[0].symbol in ("and", ">=", "<=", ">", "<"):
        raise UnsupportedConstructError("duration inequality", node.line, node.column)
    if len(items) != 3 or _expect_symbol(items[0], "'='") != "=" \
            or _expect_symbol(items[1], "?duration") != "?duration":
        raise PddlSyntaxError(f"action {action!r}: duration must be (= ?duration <expr>)",
                              node.line, node.column)
    return _parse_duration_expr(items[2])


def _parse_condition_item(node: SExpr, action: str) -> TimedCondition:
    items = _expect_list(node, "a timed condition")
    if not items:
        raise PddlSyntaxError("empty condition", node.line, node.column)
    head = _expect_symbol(items[0], "a time qualifier")
    if head in _UNSUPPORTED_FORMS:
        raise UnsupportedConstructError(_UNSUPPORTED_FORMS[head], node.line, node.column)
    if head not in ("at", "over"):
        raise PddlSyntaxError(
            f"action {action!r}: condition must be (at start ..), (at end ..) or (over all ..)",
            node.line, node.column)
    if len(items) != 3:
        raise PddlSyntaxError("timed condition takes a qualifier and one atom",
                              node.line, node.column)
    qual = _expect_symbol(items[1], "start/end/all")
    if head == "at" and qual == "start":
        when = AT_START
    elif head == "at" and qual == "end":
        when = AT_END
    elif head == "over" and qual == "all":
        when = OVER_ALL
    else:
        raise PddlSyntaxError(f"unknown time qualifier ({head} {qual})", node.line, node.column)
    body = items[2]
    if body.is_list and body.items and not body.items[0].is_list and body.items[0].symbol == "not":
        raise UnsupportedConstructError("negative condition (not ...)", body.line, body.column)
    return TimedCondition(when, _parse_atom(body))


def _parse_effect_item(node: SExpr, action: str) -> TimedEffect:
    items = _expect_list(node, "a timed effect")
    if not items:
        raise PddlSyntaxError("empty effect", node.line, node.column)
    head = _expect_symbol(items[0], "a time qualifier")
    if head in _UNSUPPORTED_FORMS:
        raise UnsupportedConstructError(_UNSUPPORTED_FORMS[head], node.line, node.column)
    if head != "at" or len(items) != 3:
        raise PddlSyntaxError(
            f"action {action!r}: effect must be (at start ..) or (at end ..)",
            node.line, node.column)
    qual = _expect_symbol(items[1], "start/end")
    if qual == "start":
        when = AT_START
    elif qual == "end":
        when = AT_END
    else:
        raise PddlSyntaxError(f"unknown effect qualifier (at {qual})", node.line, node.column)
    return TimedEffect(when, _parse_literal(items[2]))


def _parse_and_block(node: SExpr, item_parser, action: str) -> list:
    """A single item or an (and item*) conjunction."""
    items = _expect_list(node, "a condition or effect")
    if items and not items[0].is_list and items[0].symbol == "and":
        return [item_parser(child, action) for child in items[1:]]
    return [item_parser(node, action)]


def _parse_durative_action(node: SExpr) -> DurativeAction:
    items = _expect_list(node, ":durative-action")
    if len(items) < 2:
        raise PddlSyntaxError("durative action needs a name", node.line, node.column)
    name = _expect_symbol(items[1], "an action name")
    sections: dict[str, SExpr] = {}
    i = 2
    while i < len(items):
        key = _expect_symbol(items[i], "an action section keyword")
        if i + 1 >= len(items):
            raise PddlSyntaxError(f"action {name!r}: section {key} has no body",
                                  items[i].line, items[i].column)
        if key in sections:
            raise PddlSyntaxError(f"action {name!r}: duplicate section {key}",
                                  items[i].line, items[i].column)
        sections[key] = items[i + 1]
        i += 2
    for key in sections:
        if key not in (":parameters", ":duration", ":condition", ":effect"):
            raise UnsupportedConstructError(f"action section {key}", node.line, node.column)
    for key in (":parameters", ":duration", ":effect"):
        if key not in sections:
            raise PddlSyntaxError(f"action {name!r}: missing {key}", node.line, node.column)

    raw_params = _parse_typed_list(_expect_list(sections[":parameters"], ":parameters"), "object")
    params = tuple(Parameter(n, t) for n, t in raw_params)
    for p in params:
        if not p.name.startswith("?"):
            raise PddlSyntaxError(f"action {name!r}: parameter {p.name!r} must start with '?'",
                                  sections[":parameters"].line, sections[":parameters"].column)
    duration = _parse_duration(sections[":duration"], name)
    conditions: list[TimedCondition] = []
    if ":condition" in sections:
        conditions = _parse_and_block(sections[":condition"], _parse_condition_item, name)
    effects = _parse_and_block(sections[":effect"], _parse_effect_item, name)
    return DurativeAction(name, params, duration, tuple(conditions), tuple(effects))


def parse_domain(text: str) -> Domain:
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise PddlSyntaxError("expected exactly one (define ...) form at top level", 1, 1)
    root = forms[0]
    items = _expect_list(root, "(define ...)")
    if not items or _expect_symbol(items[0], "define") != "define":
        raise PddlSyntaxError("domain file must start with (define ...)", root.line, root.column)
    header = _expect_list(items[1], "(domain NAME)")
    if len(header) != 2 or _expect_symbol(header[0], "domain") != "domain":
        raise PddlSyntaxError("expected (domain NAME)", items[1].line, items[1].column)
    name = _expect_symbol(header[1], "a domain name")

    requirements: tuple[str, ...] = ()
    types: list[tuple[str, str | None]] = []
    predicates: list[PredicateDecl] = []
    functions: list[FunctionDecl] = []
    actions: list[DurativeAction] = []

    for block in items[2:]:
        head = _head(block)
        if head in _UNSUPPORTED_TOPLEVEL:
            raise UnsupportedConstructError(_UNSUPPORTED_TOPLEVEL[head], block.line, block.column)
        blk = block.items or ()
        if head == ":requirements":
            requirements = tuple(_expect_symbol(r, "a requirement flag") for r in blk[1:])
        elif head == ":types":
            for tname, parent in _parse_typed_list(blk[1:], ""):
                types.append((tname, parent or None))
        elif head == ":predicates":
            for pred in blk[1:]:
                pitems = _expect_list(pred, "a predicate declaration")
                pname = _expect_symbol(pitems[0], "a predicate name")
                pparams = tuple(Parameter(n, t)
                                for n, t in _parse_typed_list(pitems[1:], "object"))
                if any(p.name == pname for p in predicates):
                    raise PddlSemanticError(f"duplicate predicate name {pname!r}")
                predicates.append(PredicateDecl(pname, pparams))
        elif head == ":functions":
            for fn in blk[1:]:
                fitems = _expect_list(fn, "a function declaration")
                fname = _expect_symbol(fitems[0], "a function name")
                fparams = tuple(Parameter(n, t)
                                for n, t in _parse_typed_list(fitems[1:], "object"))
                if any(f.name == fname for f in functions):
                    raise PddlSemanticError(f"duplicate function name {fname!r}")
                functions.append(FunctionDecl(fname, fparams))
        elif head == ":durative-action":
            action = _parse_durative_action(block)
            if any(a.name == action.name for a in actions):
                raise PddlSemanticError(f"duplicate action name {action.name!r}")
            actions.append(action)
        else:
            raise UnsupportedConstructError(f"domain block {head}", block.line, block.column)

    # types used only as parents are implicitly declared under object
    declared = {t for t, _ in types}
    for _, parent in list(types):
        if parent is not None and parent not in declared and parent != "object":
            types.append((parent, None))
            declared.add(parent)

    domain = Domain(name, requirements, tuple(types), tuple(predicates),
                    tuple(functions), tuple(actions))
    _check_domain(domain)
    return domain


def _check_domain(domain: Domain) -> None:
    known_types = domain.type_names()
    for tname, parent in domain.types:
        if parent is not None and parent not in known_types:
            raise PddlSemanticError(f"type {tname!r} has unknown parent {parent!r}")
    for decl in list(domain.predicates) + list(domain.functions):
        for p in decl.params:
            if p.type not in known_types:
                raise PddlSemanticError(
                    f"declaration {decl.name!r}: unknown type {p.type!r}")
    for action in domain.actions:
        param_types = {}
        for p in action.params:
            if p.type not in known_types:
                raise PddlSemanticError(f"action {action.name!r}: unknown type {p.type!r}")
            if p.name in param_types:
                raise PddlSemanticError(f"action {action.name!r}: duplicate parameter {p.name}")
            param_types[p.name] = p.type
        for cond in action.conditions:
            _check_schema_atom(domain, action, cond.atom, param_types)
        for eff in action.effects:
            _check_schema_atom(domain, action, eff.literal.atom, param_types)


def _check_schema_atom(domain: Domain, action: DurativeAction, atom: Atom,
                       param_types: dict[str, str]) -> None:
    decl = domain.predicate(atom.predicate)
    if len(atom.args) != len(decl.params):
        raise PddlSemanticError(
            f"action {action.name!r}: predicate {atom.predicate!r} expects "
            f"{len(decl.params)} arguments, got {len(atom.args)}")
    for arg, param in zip(atom.args, decl.params):
        if arg.startswith("?"):
            if arg not in param_types:
                raise PddlSemanticError(
                    f"action {action.name!r}: unbound variable {arg} in {atom}")
            if not domain.conforms(param_types[arg], param.type):
                raise PddlSemanticError(
                    f"action {action.name!r}: variable {arg} of type {param_types[arg]!r} "
                    f"does not fit {param.name} - {param.type} of {atom.predicate!r}")
        # constants inside action bodies are resolved against the problem later


def parse_problem(text: str, domain: Domain) -> Problem:
    forms = read_sexprs(text)
    if len(forms) != 1:
        raise PddlSyntaxError("expected exactly one (define ...) form at top level", 1, 1)
    root = forms[0]
    items = _expect_list(root, "(define ...)")
    if not items or _expect_symbol(items[0], "define") != "define":
        raise PddlSyntaxError("problem file must start with (define ...)", root.line, root.column)
    header = _expect_list(items[1], "(problem NAME)")
    if len(header) != 2 or _expect_symbol(header[0], "problem") != "problem":
        raise PddlSyntaxError("expected (problem NAME)", items[1].line, items[1].column)
    name = _expect_symbol(header[1], "a problem name")

    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    function_init: list[tuple[str, tuple[str, ...], Fraction]] = []
    tils: list[TimedInitialLiteral] = []
    goal: list[Literal] = []

    for block in items[2:]:
        head = _head(block)
        blk = block.items or ()
        if head == ":domain":
            domain_name = _expect_symbol(blk[1], "a domain name")
        elif head == ":objects":
            objects = _parse_typed_list(blk[1:], "object")
        elif head == ":init":
            for entry in blk[1:]:
                _parse_init_entry(entry, init, function_init, tils)
        elif head == ":goal":
            if len(blk) != 2:
                raise PddlSyntaxError("(:goal ...) takes one formula", block.line, block.column)
            body = blk[1]
            bitems = _expect_list(body, "a goal formula")
            if bitems and not bitems[0].is_list and bitems[0].symbol == "and":
                goal = [_parse_literal(child) for child in bitems[1:]]
            else:
                goal = [_parse_literal(body)]
        elif head == ":metric":
            raise UnsupportedConstructError("metric block (:metric); cost is always makespan",
                                            block.line, block.column)
        else:
            raise UnsupportedConstructError(f"problem block {head}", block.line, block.column)

    if domain_name is None:
        raise PddlSyntaxError("problem is missing (:domain ...)", root.line, root.column)
    if domain_name != domain.name:
        raise PddlSemanticError(
            f"problem references domain {domain_name!r} but was parsed against {domain.name!r}")

    problem = Problem(name, domain_name, tuple(objects), tuple(init),
                      tuple(function_init), tuple(tils), tuple(goal))
    _check_problem(domain, problem)
    return problem


def _parse_init_entry(entry: SExpr, init: list[Atom],
                      function_init: list[tuple[str, tuple[str, ...], Fraction]],
                      tils: list[TimedInitialLiteral]) -> None:
    items = _expect_list(entry, "an init entry")
    if not items:
        raise PddlSyntaxError("empty init entry", entry.line, entry.column)
    head = _expect_symbol(items[0], "an init entry head")
    if head == "=":
        if len(items) != 3:
            raise PddlSyntaxError("function init must be (= (fn args) value)",
                                  entry.line, entry.column)
        fn = _expect_list(items[1], "a function application")
        fname = _expect_symbol(fn[0], "a function name")
        fargs = tuple(_expect_symbol(a, "a function argument") for a in fn[1:])
        value = _expect_symbol(items[2], "a number")
        if not _DECIMAL_RE.match(value):
            raise PddlSyntaxError(f"function value must be a decimal, got {value!r}",
                                  items[2].line, items[2].column)
        function_init.append((fname, fargs, parse_decimal(value)))
        return
    if head == "at" and len(items) == 3 and not items[1].is_list \
            and _DECIMAL_RE.match(items[1].symbol or ""):
        time = parse_decimal(items[1].symbol or "")
        if time <= 0:
            raise PddlSemanticError(f"timed initial literal time must be positive, got {time}")
        tils.append(TimedInitialLiteral(time, _parse_literal(items[2])))
        return
    if head == "not":
        raise UnsupportedConstructError("negative init literal (closed world assumed)",
                                        entry.line, entry.column)
    init.append(_parse_atom(entry))


def _check_problem(domain: Domain, problem: Problem) -> None:
    known_types = domain.type_names()
    seen = set()
    for obj, typ in problem.objects:
        if obj in seen:
            raise PddlSemanticError(f"duplicate object {obj!r}")
        seen.add(obj)
        if typ not in known_types:
            raise PddlSemanticError(f"object {obj!r} has unknown type {typ!r}")
    for atom in problem.init:
        if not atom.is_ground():
            raise PddlSemanticError(f"init atom {atom} is not ground")
        check_atom(domain, problem, atom)
    for fname, fargs, _ in problem.function_init:
        decl = domain.function(fname)
        if len(fargs) != len(decl.params):
            raise PddlSemanticError(
                f"function {fname!r} expects {len(decl.params)} arguments, got {len(fargs)}")
        for arg, param in zip(fargs, decl.params):
            if not domain.conforms(problem.object_type(arg), param.type):
                raise PddlSemanticError(
                    f"function argument {arg!r} does not fit {param.name} - {param.type} "
                    f"of {fname!r}")
    for til in problem.tils:
        if not til.literal.atom.is_ground():
            raise PddlSemanticError(f"timed initial literal {til.literal} is not ground")
        check_atom(domain, problem, til.literal.atom)
    for lit in problem.goal:
        if not lit.atom.is_ground():
            raise PddlSemanticError(f"goal literal {lit} is not ground")
        check_atom(domain, problem, lit.atom)


_PLAN_LINE_RE = re.compile(
    r"^\s*(?P<time>\d+(?:\.\d+)?)\s*:\s*"
    r"\(\s*(?P<name>[^\s()]+)(?P<args>(?:\s+[^\s()]+)*)\s*\)\s*"
    r"\[\s*(?P<dur>\d+(?:\.\d+)?)\s*\]\s*$")


def _resolve_name(requested: str, known: list[str], what: str, line_no: int) -> str:
    """Exact match first, then a unique case-insensitive match."""
    if requested in known:
        return requested
    folded = [k for k in known if k.lower() == requested.lower()]
    if len(folded) == 1:
        return folded[0]
    raise PlanFormatError(f"line {line_no}: unknown {what} {requested!r}")


def parse_plan(text: str, domain: Domain, problem: Problem) -> TimedPlan:
    """Parse `<time>: (<name> <args...>) [<duration>]` lines.

    Comment lines (;) and blank lines are ignored; an empty file is the empty
    plan with cost 0. Steps are sorted by start time, ties keep textual order.
    """
    steps: list[PlanStep] = []
    action_names = [a.name for a in domain.actions]
    object_names = [o for o, _ in problem.objects]
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        match = _PLAN_LINE_RE.match(line)
        if not match:
            raise PlanFormatError(
                f"line {line_no}: malformed plan line {raw.strip()!r} "
                "(expected '<time>: (<name> <args...>) [<duration>]')")
        time = parse_decimal(match.group("time"))
        duration = parse_decimal(match.group("dur"))
        name = _resolve_name(match.group("name"), action_names, "action", line_no)
        args = tuple(_resolve_name(a, object_names, "object", line_no)
                     for a in match.group("args").split())
        try:
            action = ground_action(domain, problem, name, args)
        except PddlSemanticError as exc:
            raise PlanFormatError(f"line {line_no}: {exc}") from exc
        steps.append(PlanStep(time, action, duration))
    return TimedPlan(sort_plan_steps(steps))
