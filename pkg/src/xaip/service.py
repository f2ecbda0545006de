"""Explanation sessions: the ask loop, the explanation tree, persistence.

A session wraps one original model and grows a tree of explanation nodes. The
root node holds the original plan; every other node answers one question asked
on its parent, carrying the hypothetical model, the plan that came back (when
one did) and the contrastive explanation against the original plan.

Within a session asks are serialized: a second ask while one is running is
refused rather than queued, so the caller always knows whose answer arrives.
Unsolvable and timed-out asks still create nodes; "no plan satisfies these
constraints" is an answer worth keeping in the tree.
"""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .compiler import (
    FormalQuestion,
    HModel,
    assemble_hplan,
    compile_question,
    question_from_wire,
    strip_back,
)
from .errors import AskInFlightError, SessionError, UnknownIdError
from .explainer import ContrastiveExplanation, explain
from .model import Domain, Problem, TimedPlan
from .numbers import format_decimal
from .parser import parse_domain, parse_plan, parse_problem
from .planner import PlannerConfig, default_config
from .planner import plan as run_planner
from .printer import print_domain, print_plan, print_problem
from .search import PLAN_FOUND, SearchLimits, TIMEOUT, UNSOLVABLE
from .validator import validate

SCHEMA_VERSION = 1


@dataclass
class ExplanationNode:
    """One point in the explanation tree.

    plan is absolute-time with original action names (generated clones already
    renamed back); it is None when the planner reported unsolvable or timeout,
    in which case status carries that answer.
    """

    id: str
    parent: str | None
    question: FormalQuestion | None
    hmodel: HModel
    plan: TimedPlan | None
    explanation: ContrastiveExplanation | None
    status: str
    planner_log: str
    created_at: str


class Session:
    def __init__(self, session_id: str, domain: Domain, problem: Problem,
                 planner_config: PlannerConfig):
        self.id = session_id
        self.domain = domain
        self.problem = problem
        self.planner_config = planner_config
        self.nodes: dict[str, ExplanationNode] = {}
        self._counter = 0
        self._ask_lock = threading.Lock()
        self._cancel = threading.Event()

    @property
    def root(self) -> ExplanationNode:
        return self.nodes["n0"]

    def node(self, node_id: str) -> ExplanationNode:
        found = self.nodes.get(node_id)
        if found is None:
            raise UnknownIdError(f"unknown node {node_id!r}")
        return found

    def next_id(self) -> str:
        nid = f"n{self._counter}"
        self._counter += 1
        return nid

    def cancel_ask(self) -> None:
        """Ask any in-flight planner run to stop; a no-op when idle."""
        self._cancel.set()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def create_session(domain_text: str, problem_text: str, plan_text: str | None = None,
                   config: PlannerConfig | None = None,
                   session_id: str | None = None) -> Session:
    """Parse the model, obtain a valid root plan, return a fresh session.

    When plan_text is omitted the configured planner produces the root plan.
    A supplied plan that does not validate is rejected with the failure
    spelled out; nothing is ever explained relative to a broken baseline.
    """
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    config = config or default_config()
    root_model = HModel.root(domain, problem)

    planner_log = ""
    if plan_text is not None:
        root_plan = parse_plan(plan_text, domain, problem)
        report = validate(domain, problem, root_plan)
        if not report.valid:
            f = report.failure
            raise SessionError(
                f"root plan rejected: {f.reason} at {f.time}: {f.detail}")
    else:
        outcome = run_planner(root_model, config)
        if not outcome.ok:
            raise SessionError(
                f"planner could not produce a root plan ({outcome.status}): "
                f"{outcome.planner_log}")
        root_plan = outcome.plan
        planner_log = outcome.planner_log

    session = Session(session_id or uuid.uuid4().hex[:12], domain, problem, config)
    session.nodes["n0"] = ExplanationNode(
        id=session.next_id(), parent=None, question=None, hmodel=root_model,
        plan=root_plan, explanation=None, status=PLAN_FOUND,
        planner_log=planner_log, created_at=_now())
    return session


def ask(session: Session, node_id: str,
        question: FormalQuestion | Mapping) -> ExplanationNode:
    """Answer one question on a node and append the resulting child.

    The question may be a FormalQuestion or its wire-format mapping. Asks on a
    session are serialized: a concurrent call gets AskInFlightError instead of
    waiting. Unsolvable/timeout answers create a plan-less child carrying the
    status; a planner malfunction raises and leaves the tree untouched.
    """
    if not session._ask_lock.acquire(blocking=False):
        raise AskInFlightError(
            f"another ask is already running on session {session.id}")
    try:
        parent = session.node(node_id)
        if parent.plan is None:
            raise SessionError(
                f"node {node_id} has no plan to refine; ask on one of its ancestors")
        if isinstance(question, Mapping):
            question = question_from_wire(dict(question), parent.hmodel.domain,
                                          parent.hmodel.problem)

        hmodel = compile_question(parent.hmodel, parent.plan, question)
        session._cancel = threading.Event()
        outcome = run_planner(hmodel, session.planner_config, session._cancel)

        if outcome.status in (UNSOLVABLE, TIMEOUT):
            child = ExplanationNode(
                id=session.next_id(), parent=parent.id, question=question,
                hmodel=hmodel, plan=None, explanation=None,
                status=outcome.status, planner_log=outcome.planner_log,
                created_at=_now())
            session.nodes[child.id] = child
            return child
        if outcome.status != PLAN_FOUND:
            raise SessionError(f"planner failed: {outcome.planner_log}")

        assembled = assemble_hplan(hmodel.plan_prefix, outcome.plan, hmodel.time_origin)
        stripped = strip_back(hmodel, assembled)
        explanation = explain(session.domain, session.problem,
                              session.root.plan, stripped, question=question)
        child = ExplanationNode(
            id=session.next_id(), parent=parent.id, question=question,
            hmodel=hmodel, plan=stripped, explanation=explanation,
            status=PLAN_FOUND, planner_log=outcome.planner_log, created_at=_now())
        session.nodes[child.id] = child
        return child
    finally:
        session._ask_lock.release()


def tree_view(session: Session) -> dict:
    """Compact listing of the whole tree: ids, links, summaries, statuses."""
    rows = []
    for node in session.nodes.values():
        ex = node.explanation
        rows.append({
            "id": node.id,
            "parent": node.parent,
            "kind": node.question.kind if node.question else None,
            "question": node.question.describe() if node.question else None,
            "status": node.status,
            "cost": format_decimal(node.plan.cost) if node.plan is not None else None,
            "diffcost": format_decimal(ex.comparison.diffcost) if ex else None,
            "flagged": bool(ex.redundancy_flags) if ex else False,
            "created_at": node.created_at,
        })
    return {"session": session.id, "nodes": rows}


class SessionStore:
    """In-memory registry of live sessions, safe for concurrent handlers."""

    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session) -> Session:
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            found = self._sessions.get(session_id)
        if found is None:
            raise UnknownIdError(f"unknown session {session_id!r}")
        return found

    def delete(self, session_id: str) -> None:
        with self._lock:
            found = self._sessions.pop(session_id, None)
        if found is None:
            raise UnknownIdError(f"unknown session {session_id!r}")
        # wake any in-flight planner run so its thread can finish promptly
        found.cancel_ask()

    def ids(self) -> list[str]:
        with self._lock:
            return list(self._sessions)


def save_session(session: Session, path: str | Path) -> None:
    """Write the session as a single JSON document with embedded model texts."""
    doc = {
        "schema_version": SCHEMA_VERSION,
        "session": session.id,
        "domain": print_domain(session.domain),
        "problem": print_problem(session.problem),
        "planner": {
            "mode": session.planner_config.mode,
            "command": session.planner_config.command,
            "timeout": session.planner_config.timeout,
            "output_format": session.planner_config.output_format,
            "builtin_limits": {
                "max_expanded_states": session.planner_config.builtin_limits.max_expanded_states,
                "max_objects": session.planner_config.builtin_limits.max_objects,
            },
        },
        "nodes": [
            {
                "id": node.id,
                "parent": node.parent,
                "status": node.status,
                "created_at": node.created_at,
                "question": node.question.to_wire() if node.question else None,
                "plan": print_plan(node.plan) if node.plan is not None else None,
                "planner_log": node.planner_log,
            }
            for node in session.nodes.values()
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_session(path: str | Path) -> Session:
    """Rebuild a session from its file.

    Hypothetical models are not stored; they are reproduced by replaying each
    question through the compiler along the tree, which doubles as an
    integrity check of the file's provenance chain.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SessionError(f"cannot read session file: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise SessionError(
            f"unsupported session schema: {doc.get('schema_version')!r} "
            f"(expected {SCHEMA_VERSION})")

    try:
        domain = parse_domain(doc["domain"])
        problem = parse_problem(doc["problem"], domain)
        planner_doc = doc["planner"]
        limits = planner_doc.get("builtin_limits") or {}
        config = PlannerConfig(
            mode=planner_doc["mode"],
            command=planner_doc.get("command"),
            timeout=planner_doc["timeout"],
            output_format=planner_doc["output_format"],
            builtin_limits=SearchLimits(
                max_expanded_states=limits.get("max_expanded_states", 400_000),
                max_objects=limits.get("max_objects", 64)),
        )
        session = Session(doc["session"], domain, problem, config)

        for node_doc in doc["nodes"]:
            parent_id = node_doc["parent"]
            plan_text = node_doc["plan"]
            node_plan = (parse_plan(plan_text, domain, problem)
                         if plan_text is not None else None)
            if parent_id is None:
                node = ExplanationNode(
                    id=node_doc["id"], parent=None, question=None,
                    hmodel=HModel.root(domain, problem), plan=node_plan,
                    explanation=None, status=node_doc["status"],
                    planner_log=node_doc.get("planner_log", ""),
                    created_at=node_doc["created_at"])
            else:
                parent = session.nodes.get(parent_id)
                if parent is None:
                    raise SessionError(
                        f"corrupt session file: node {node_doc['id']} references "
                        f"missing parent {parent_id!r}")
                q = question_from_wire(node_doc["question"],
                                       parent.hmodel.domain, parent.hmodel.problem)
                hmodel = compile_question(parent.hmodel, parent.plan, q)
                explanation = None
                if node_plan is not None:
                    explanation = explain(domain, problem, session.root.plan,
                                          node_plan, question=q)
                node = ExplanationNode(
                    id=node_doc["id"], parent=parent_id, question=q,
                    hmodel=hmodel, plan=node_plan, explanation=explanation,
                    status=node_doc["status"],
                    planner_log=node_doc.get("planner_log", ""),
                    created_at=node_doc["created_at"])
            session.nodes[node.id] = node
    except KeyError as exc:
        raise SessionError(f"corrupt session file: missing field {exc}") from exc

    suffixes = [int(n[1:]) for n in session.nodes if n[1:].isdigit()]
    session._counter = max(suffixes, default=-1) + 1
    return session


__all__ = [
    "ExplanationNode", "Session", "SessionStore", "SCHEMA_VERSION",
    "create_session", "ask", "tree_view", "save_session", "load_session",
]
