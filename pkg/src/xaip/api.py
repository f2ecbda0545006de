"""HTTP JSON API over explanation sessions.

Thin shell around the service module: routes parse and serialize, the
service does the work. Every number leaves as a decimal string so clients
never see floating point artifacts. Errors map onto status codes: 400 for
malformed requests, 404 unknown ids, 409 when an ask is already running,
422 for model/question/plan rejections (with source position when known),
500 when a hypothetical plan fails validation against the original model.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .errors import (
    AskInFlightError,
    InternalValidationError,
    PddlSemanticError,
    PddlSyntaxError,
    UnknownIdError,
    XaipError,
)
from .explainer import ContrastiveExplanation, to_dot
from .model import PlanStep, TimedPlan, action_groundings, ground_action
from .numbers import format_decimal, format_time
from .planner import PlannerConfig
from .printer import print_domain, print_plan, print_problem
from .service import (
    ExplanationNode,
    Session,
    SessionStore,
    ask,
    create_session,
    tree_view,
)
from .validator import validate


class CreateSessionRequest(BaseModel):
    domain: str
    problem: str
    plan: str | None = None


def _step_doc(step: PlanStep) -> dict:
    return {
        "time": format_time(step.time),
        "action": str(step.action),
        "duration": format_time(step.duration),
        "end": format_time(step.end),
    }


def _plan_doc(plan: TimedPlan) -> dict:
    return {
        "steps": [_step_doc(s) for s in plan.steps],
        "cost": format_decimal(plan.cost),
        "text": print_plan(plan),
    }


def _explanation_doc(ex: ContrastiveExplanation) -> dict:
    cmp = ex.comparison
    return {
        "existing": [_step_doc(s) for s in cmp.existing],
        "removed": [_step_doc(s) for s in cmp.removed],
        "added": [_step_doc(s) for s in cmp.added],
        "diffcost": format_decimal(cmp.diffcost),
        "redundant_steps": list(ex.redundancy_flags),
        "causal_dot": to_dot(ex.causal_diff) if ex.causal_diff is not None else None,
    }


def _validation_doc(session: Session, node: ExplanationNode) -> dict | None:
    # explanation nodes carry their report; the root is re-checked on demand
    if node.explanation is not None:
        report = node.explanation.hplan_validation
    elif node.plan is not None:
        report = validate(session.domain, session.problem, node.plan)
    else:
        return None
    doc = report.to_json()
    doc["text"] = report.to_text()
    return doc


def _node_doc(session: Session, node: ExplanationNode) -> dict:
    return {
        "id": node.id,
        "parent": node.parent,
        "status": node.status,
        "created_at": node.created_at,
        "question": node.question.to_wire() if node.question else None,
        "question_text": node.question.describe() if node.question else None,
        "plan": _plan_doc(node.plan) if node.plan is not None else None,
        "explanation": _explanation_doc(node.explanation) if node.explanation else None,
        "validation": _validation_doc(session, node),
        "hmodel": {
            "domain": print_domain(node.hmodel.domain),
            "problem": print_problem(node.hmodel.problem),
        },
        "planner_log": node.planner_log,
    }


def _error_body(exc: XaipError) -> dict:
    body: dict = {"type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, PddlSyntaxError) and exc.line is not None:
        body["position"] = {"line": exc.line, "column": exc.column}
    return {"error": body}


def _frontend_dist(override: str | Path | None) -> Path | None:
    explicit = override or os.environ.get("XAIP_FRONTEND_DIST")
    if explicit:
        return Path(explicit)
    # editable install layout: src/xaip/api.py -> repo root -> frontend/dist
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def create_app(store: SessionStore | None = None,
               config: PlannerConfig | None = None,
               frontend: str | Path | None = None) -> FastAPI:
    """Build the application. store/config default per process/request."""
    store = store if store is not None else SessionStore()
    app = FastAPI(title="xaip", version=__version__)

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    def malformed_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "error": {"type": "RequestValidationError", "message": str(exc)}})

    @app.exception_handler(XaipError)
    def domain_error(request: Request, exc: XaipError):
        status = 422
        if isinstance(exc, UnknownIdError):
            status = 404
        elif isinstance(exc, AskInFlightError):
            status = 409
        elif isinstance(exc, InternalValidationError):
            status = 500
        return JSONResponse(status_code=status, content=_error_body(exc))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": store.ids()}

    @app.post("/sessions", status_code=201)
    def new_session(req: CreateSessionRequest):
        session = store.add(create_session(req.domain, req.problem, req.plan, config))
        return {"session": session.id, "root": session.root.id,
                "cost": format_decimal(session.root.plan.cost)}

    @app.get("/sessions/{sid}/tree")
    def get_tree(sid: str):
        return tree_view(store.get(sid))

    @app.get("/sessions/{sid}/nodes/{nid}")
    def get_node(sid: str, nid: str):
        session = store.get(sid)
        return _node_doc(session, session.node(nid))

    @app.post("/sessions/{sid}/nodes/{nid}/ask", status_code=201)
    def post_ask(sid: str, nid: str, question: dict = Body(...)):
        child = ask(store.get(sid), nid, question)
        doc: dict = {"node": child.id, "status": child.status}
        if child.plan is not None:
            doc["cost"] = format_decimal(child.plan.cost)
        if child.explanation is not None:
            doc["diffcost"] = format_decimal(child.explanation.comparison.diffcost)
        return doc

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str):
        store.delete(sid)
        return {"deleted": sid}

    @app.get("/sessions/{sid}/ground-actions")
    def ground_actions_endpoint(sid: str, schema: str | None = None):
        session = store.get(sid)
        if schema is None:
            return {"schemas": [a.name for a in session.domain.actions]}
        sch = session.domain.action(schema)
        actions = []
        for args in action_groundings(session.domain, session.problem, sch):
            try:
                ga = ground_action(session.domain, session.problem, sch.name, args)
            except PddlSemanticError:
                continue  # grounding has no positive duration, never askable
            actions.append(str(ga))
        return {"schema": sch.name, "actions": actions}

    dist = _frontend_dist(frontend)
    if dist is not None and dist.is_dir():
        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")

    return app


app = create_app()

__all__ = ["create_app", "app", "CreateSessionRequest"]
