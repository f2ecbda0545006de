"""Contrastive explanations built from a plan pair.

The centerpiece is the four-bucket comparison between the original plan and
the hypothetical plan: steps that persist, steps that disappeared, steps that
are new, and the cost difference. On top of that an explanation carries the
validation outcome against the original model, redundancy flags for the
question's forced or suggested action, and an optional causal-structure diff.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .compiler import (
    FORCE,
    REPLACE,
    REPLACE_IN_STATE,
    FormalQuestion,
    HModel,
    find_redundant,
    strip_back,
)
from .errors import InternalValidationError
from .model import Domain, GroundAction, PlanStep, Problem, TimedPlan
from .validator import (
    CausalEdge,
    CausalGraph,
    CausalNode,
    ValidationReport,
    causal_links,
    validate,
)


@dataclass(frozen=True)
class Comparison:
    """What changed between the original plan and the hypothetical plan.

    Matching is a multiset comparison on action name and arguments; timestamps
    never participate. Matched steps land in existing and are shown with the
    hypothetical plan's timestamps. diffcost is cost(hplan) - cost(plan).
    """

    existing: tuple[PlanStep, ...]
    removed: tuple[PlanStep, ...]
    added: tuple[PlanStep, ...]
    diffcost: Fraction


@dataclass(frozen=True)
class CausalDiff:
    """Node and edge partition of two causal graphs over the same domain.

    Nodes are identified by action signature plus occurrence ordinal, so the
    same action appearing in both plans lines up even when its times differ.
    """

    shared_nodes: tuple[CausalNode, ...]
    added_nodes: tuple[CausalNode, ...]
    removed_nodes: tuple[CausalNode, ...]
    shared_edges: tuple[CausalEdge, ...]
    added_edges: tuple[CausalEdge, ...]
    removed_edges: tuple[CausalEdge, ...]


@dataclass(frozen=True)
class ContrastiveExplanation:
    comparison: Comparison
    question: FormalQuestion | None
    hplan_validation: ValidationReport
    redundancy_flags: tuple[int, ...]
    causal_diff: CausalDiff | None


def _step_key(step: PlanStep):
    return (step.time, step.action.name, step.action.args)


def compare(pi: TimedPlan, pi_h: TimedPlan) -> Comparison:
    """Greedy multiset diff of two plans, earliest occurrences pairing first."""
    pool: dict[tuple, deque[PlanStep]] = {}
    for step in sorted(pi_h.steps, key=_step_key):
        pool.setdefault(step.action.signature, deque()).append(step)

    existing: list[PlanStep] = []
    removed: list[PlanStep] = []
    for step in sorted(pi.steps, key=_step_key):
        matches = pool.get(step.action.signature)
        if matches:
            existing.append(matches.popleft())
        else:
            removed.append(step)
    added = [step for matches in pool.values() for step in matches]

    return Comparison(
        existing=tuple(sorted(existing, key=_step_key)),
        removed=tuple(sorted(removed, key=_step_key)),
        added=tuple(sorted(added, key=_step_key)),
        diffcost=pi_h.cost - pi.cost,
    )


def suggested_action(question: FormalQuestion | None) -> GroundAction | None:
    """The action a question forces into the plan, if any.

    Forbid, ordering and window questions only constrain actions the planner
    was already free to use, so they contribute no redundancy focus.
    """
    if question is None:
        return None
    if question.kind == FORCE:
        return question.action_a
    if question.kind in (REPLACE, REPLACE_IN_STATE):
        return question.action_b
    return None


def explain(domain: Domain, problem: Problem, pi: TimedPlan, pi_h: TimedPlan,
            question: FormalQuestion | None = None, hmodel: HModel | None = None,
            include_causal: bool = True) -> ContrastiveExplanation:
    """Build the full explanation for a hypothetical plan.

    domain and problem are the ORIGINAL model. pi_h may still use generated
    clone action names; passing the hmodel it was planned against renames them
    back before anything else happens. A stripped plan that fails validation
    against the original model is a compilation defect, reported by raising
    InternalValidationError rather than by returning a broken explanation.
    """
    stripped = strip_back(hmodel, pi_h) if hmodel is not None else pi_h
    report = validate(domain, problem, stripped)
    if not report.valid:
        f = report.failure
        raise InternalValidationError(
            f"hypothetical plan does not validate against the original model: "
            f"{f.reason} at {f.time}: {f.detail}")

    comparison = compare(pi, stripped)
    focus = suggested_action(question)
    flags = tuple(find_redundant(domain, problem, stripped, focus)) if focus else ()

    diff = None
    if include_causal:
        diff = diff_causal(causal_links(domain, problem, pi),
                           causal_links(domain, problem, stripped))
    return ContrastiveExplanation(comparison, question, report, flags, diff)


def _node_key(node: CausalNode):
    return (node.kind, node.signature or ("", ()), node.ordinal)


def _edge_key(edge: CausalEdge):
    return (_node_key(edge.producer), _node_key(edge.consumer),
            (edge.atom.predicate, edge.atom.args))


def _edge_identity(edge: CausalEdge):
    return (edge.producer.identity(), edge.consumer.identity(), edge.atom)


def diff_causal(g1: CausalGraph, g2: CausalGraph) -> CausalDiff:
    """Partition two causal graphs into shared, added and removed parts.

    g1 is the original plan's graph, g2 the hypothetical one; shared members
    are reported with g2's nodes so downstream rendering shows current times.
    """
    nodes1 = {n.identity(): n for n in g1.nodes}
    nodes2 = {n.identity(): n for n in g2.nodes}
    edges1 = {_edge_identity(e): e for e in g1.edges}
    edges2 = {_edge_identity(e): e for e in g2.edges}
    return CausalDiff(
        shared_nodes=tuple(sorted((nodes2[i] for i in nodes1.keys() & nodes2.keys()),
                                  key=_node_key)),
        added_nodes=tuple(sorted((n for i, n in nodes2.items() if i not in nodes1),
                                 key=_node_key)),
        removed_nodes=tuple(sorted((n for i, n in nodes1.items() if i not in nodes2),
                                   key=_node_key)),
        shared_edges=tuple(sorted((edges2[i] for i in edges1.keys() & edges2.keys()),
                                  key=_edge_key)),
        added_edges=tuple(sorted((e for i, e in edges2.items() if i not in edges1),
                                 key=_edge_key)),
        removed_edges=tuple(sorted((e for i, e in edges1.items() if i not in edges2),
                                   key=_edge_key)),
    )


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(diff: CausalDiff) -> str:
    """Deterministic DOT text: added parts red, removed blue, shared plain."""
    lines = ["digraph causal_diff {", "  rankdir=LR;", "  node [shape=box];"]
    for node in diff.shared_nodes:
        lines.append(f"  {_quote(node.label())};")
    for node in diff.added_nodes:
        lines.append(f"  {_quote(node.label())} [color=red, fontcolor=red];")
    for node in diff.removed_nodes:
        lines.append(f"  {_quote(node.label())} [color=blue, fontcolor=blue];")
    for edge in diff.shared_edges:
        lines.append(f"  {_quote(edge.producer.label())} -> {_quote(edge.consumer.label())}"
                     f" [label={_quote(str(edge.atom))}];")
    for edge in diff.added_edges:
        lines.append(f"  {_quote(edge.producer.label())} -> {_quote(edge.consumer.label())}"
                     f" [label={_quote(str(edge.atom))}, color=red];")
    for edge in diff.removed_edges:
        lines.append(f"  {_quote(edge.producer.label())} -> {_quote(edge.consumer.label())}"
                     f" [label={_quote(str(edge.atom))}, color=blue];")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "Comparison", "CausalDiff", "ContrastiveExplanation",
    "compare", "explain", "suggested_action", "diff_causal", "to_dot",
]
