"""Command line interface.

Exit codes follow one convention everywhere: 0 is a positive answer (plan
valid, plan found, node created), 1 is a negative answer from a healthy run
(plan invalid, problem unsolvable, planner timeout), 2 is a usage or input
failure (unreadable files, parse errors, bad configuration).
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from . import __version__
from .compiler import HModel, compile_question, question_from_wire
from .errors import XaipError
from .explainer import compare, diff_causal, to_dot
from .model import Domain, Problem, TimedPlan
from .numbers import format_decimal, format_time
from .parser import parse_domain, parse_plan, parse_problem
from .planner import EXTERNAL, PlannerConfig, default_config
from .planner import plan as run_planner
from .printer import print_domain, print_plan, print_problem
from .search import PLAN_FOUND, TIMEOUT, UNSOLVABLE
from .service import (
    ask as service_ask,
    create_session,
    load_session,
    save_session,
    tree_view,
)
from .validator import causal_links, validate

_EXISTING_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)


def guard(fn):
    """Map package errors onto exit code 2 with a one-line message."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except XaipError as err:
            click.echo(f"error: {err}", err=True)
            sys.exit(2)

    return wrapper


def _load_model(domain_path: Path, problem_path: Path) -> tuple[Domain, Problem]:
    domain = parse_domain(domain_path.read_text())
    problem = parse_problem(problem_path.read_text(), domain)
    return domain, problem


def _load_question(path: Path) -> dict:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as err:
        raise click.UsageError(f"question file {path} is not valid JSON: {err}")
    if not isinstance(doc, dict):
        raise click.UsageError(f"question file {path} must hold a JSON object")
    return doc


def _planner_config(planner: str | None, timeout: float) -> PlannerConfig:
    if planner:
        return PlannerConfig(mode=EXTERNAL, command=planner, timeout=timeout)
    return default_config(timeout)


_PLANNER_OPTIONS = [
    click.option("--planner", metavar="CMD", default=None,
                 help="External planner command with {domain} and {problem} "
                      "placeholders; default is the XAIP_PLANNER environment "
                      "variable or the builtin planner."),
    click.option("--timeout", type=float, default=60.0, show_default=True,
                 help="Planner time budget in seconds."),
]


def planner_options(fn):
    for opt in reversed(_PLANNER_OPTIONS):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="xaip")
def main():
    """Contrastive what-if explanations for temporal PDDL plans."""


@main.command(name="validate")
@click.argument("domain", type=_EXISTING_FILE)
@click.argument("problem", type=_EXISTING_FILE)
@click.argument("plan", type=_EXISTING_FILE)
@click.option("--json", "as_json", is_flag=True, help="Emit the report as JSON.")
@guard
def validate_cmd(domain: Path, problem: Path, plan: Path, as_json: bool):
    """Check PLAN against DOMAIN and PROBLEM; exit 0 valid, 1 invalid."""
    dom, prob = _load_model(domain, problem)
    steps = parse_plan(plan.read_text(), dom, prob)
    report = validate(dom, prob, steps)
    if as_json:
        doc = report.to_json()
        doc["text"] = report.to_text()
        click.echo(json.dumps(doc, indent=2))
    else:
        click.echo(report.to_text())
    sys.exit(0 if report.valid else 1)


@main.command(name="plan")
@click.argument("domain", type=_EXISTING_FILE)
@click.argument("problem", type=_EXISTING_FILE)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              default=None, help="Write the plan here instead of stdout.")
@click.option("--json", "as_json", is_flag=True, help="Emit outcome as JSON.")
@planner_options
@guard
def plan_cmd(domain: Path, problem: Path, out: Path | None, as_json: bool,
             planner: str | None, timeout: float):
    """Produce a plan for DOMAIN and PROBLEM with the configured planner."""
    dom, prob = _load_model(domain, problem)
    config = _planner_config(planner, timeout)
    outcome = run_planner(HModel.root(dom, prob), config)

    if outcome.ok:
        text = print_plan(outcome.plan)
        cost = format_decimal(outcome.plan.cost)
        if out is not None:
            out.write_text(text + f"; cost = {cost} (makespan)\n")
        if as_json:
            click.echo(json.dumps({"status": outcome.status, "cost": cost,
                                   "plan": text}))
        elif out is not None:
            click.echo(f"plan with cost {cost} written to {out}")
        else:
            click.echo(text, nl=False)
        sys.exit(0)

    if as_json:
        click.echo(json.dumps({"status": outcome.status, "cost": None,
                               "plan": None, "log": outcome.planner_log}))
    else:
        click.echo(f"{outcome.status}: {outcome.planner_log}", err=True)
    sys.exit(1 if outcome.status in (UNSOLVABLE, TIMEOUT) else 2)


@main.command(name="compile-question")
@click.argument("domain", type=_EXISTING_FILE)
@click.argument("problem", type=_EXISTING_FILE)
@click.option("--question", "question_file", type=_EXISTING_FILE, required=True,
              help="JSON file with the formal question.")
@click.option("--plan", "plan_file", type=_EXISTING_FILE, default=None,
              help="Plan the question refers to (required for in-state replacement).")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path),
              default=Path("."), show_default=True,
              help="Directory for the hypothetical model files.")
@guard
def compile_question_cmd(domain: Path, problem: Path, question_file: Path,
                         plan_file: Path | None, out_dir: Path):
    """Compile one question into a hypothetical model, written as PDDL."""
    dom, prob = _load_model(domain, problem)
    steps: TimedPlan | None = None
    if plan_file is not None:
        steps = parse_plan(plan_file.read_text(), dom, prob)
    question = question_from_wire(_load_question(question_file), dom, prob)
    hmodel = compile_question(HModel.root(dom, prob), steps, question)

    out_dir.mkdir(parents=True, exist_ok=True)
    domain_out = out_dir / "hmodel-domain.pddl"
    problem_out = out_dir / "hmodel-problem.pddl"
    domain_out.write_text(print_domain(hmodel.domain))
    problem_out.write_text(print_problem(hmodel.problem))
    click.echo(f"{question.describe()}")
    click.echo(f"{domain_out}")
    click.echo(f"{problem_out}")


@main.command(name="new-session")
@click.option("--domain", "domain_file", type=_EXISTING_FILE, required=True)
@click.option("--problem", "problem_file", type=_EXISTING_FILE, required=True)
@click.option("--plan", "plan_file", type=_EXISTING_FILE, default=None,
              help="Root plan; omitted, the configured planner supplies one.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              required=True, help="Session file to create.")
@planner_options
@guard
def new_session_cmd(domain_file: Path, problem_file: Path, plan_file: Path | None,
                    out: Path, planner: str | None, timeout: float):
    """Start an explanation session and save it to a file."""
    plan_text = plan_file.read_text() if plan_file is not None else None
    session = create_session(domain_file.read_text(), problem_file.read_text(),
                             plan_text, _planner_config(planner, timeout))
    save_session(session, out)
    click.echo(f"session {session.id} with root cost "
               f"{format_decimal(session.root.plan.cost)} saved to {out}")


@main.command(name="ask")
@click.option("--session", "session_file", type=_EXISTING_FILE, required=True,
              help="Session file; updated in place.")
@click.option("--node", "node_id", default="n0", show_default=True,
              help="Node whose plan the question contrasts against.")
@click.option("--question", "question_file", type=_EXISTING_FILE, required=True,
              help="JSON file with the formal question.")
@planner_options
@guard
def ask_cmd(session_file: Path, node_id: str, question_file: Path,
            planner: str | None, timeout: float):
    """Ask one question on a session node; appends the answer node."""
    session = load_session(session_file)
    if planner or timeout != 60.0:
        session.planner_config = _planner_config(planner, timeout)
    child = service_ask(session, node_id, _load_question(question_file))
    save_session(session, session_file)

    parts = [child.id, child.status]
    if child.plan is not None:
        parts.append(f"cost {format_decimal(child.plan.cost)}")
    if child.explanation is not None:
        parts.append(f"diffcost {format_decimal(child.explanation.comparison.diffcost)}")
    click.echo(" ".join(parts))
    sys.exit(0 if child.status == PLAN_FOUND else 1)


def _bucket_lines(label: str, steps) -> list[str]:
    lines = [f"{label} ({len(steps)}):"]
    lines += [f"  {format_time(s.time).rjust(8)}: {s.action} "
              f"[{format_time(s.duration)}]" for s in steps]
    return lines


@main.command(name="diff")
@click.argument("domain", type=_EXISTING_FILE)
@click.argument("problem", type=_EXISTING_FILE)
@click.option("--plan-a", type=_EXISTING_FILE, required=True,
              help="The plan being explained.")
@click.option("--plan-b", type=_EXISTING_FILE, required=True,
              help="The hypothetical plan to contrast with.")
@click.option("--dot", "as_dot", is_flag=True,
              help="Emit the causal-graph difference as Graphviz DOT.")
@click.option("--json", "as_json", is_flag=True, help="Emit buckets as JSON.")
@guard
def diff_cmd(domain: Path, problem: Path, plan_a: Path, plan_b: Path,
             as_dot: bool, as_json: bool):
    """Show what changes between two plans for the same model."""
    dom, prob = _load_model(domain, problem)
    pa = parse_plan(plan_a.read_text(), dom, prob)
    pb = parse_plan(plan_b.read_text(), dom, prob)

    if as_dot:
        diff = diff_causal(causal_links(dom, prob, pa), causal_links(dom, prob, pb))
        click.echo(to_dot(diff), nl=False)
        return

    cmp = compare(pa, pb)
    if as_json:
        def bucket(steps):
            return [{"time": format_time(s.time), "action": str(s.action),
                     "duration": format_time(s.duration)} for s in steps]
        click.echo(json.dumps({
            "existing": bucket(cmp.existing), "removed": bucket(cmp.removed),
            "added": bucket(cmp.added), "diffcost": format_decimal(cmp.diffcost),
        }, indent=2))
        return

    lines: list[str] = []
    lines += _bucket_lines("existing", cmp.existing)
    lines += _bucket_lines("removed", cmp.removed)
    lines += _bucket_lines("added", cmp.added)
    lines.append(f"diffcost: {format_decimal(cmp.diffcost)}")
    click.echo("\n".join(lines))


@main.command(name="tree")
@click.option("--session", "session_file", type=_EXISTING_FILE, required=True)
@click.option("--json", "as_json", is_flag=True, help="Emit the tree as JSON.")
@guard
def tree_cmd(session_file: Path, as_json: bool):
    """Print the explanation tree of a saved session."""
    session = load_session(session_file)
    view = tree_view(session)
    if as_json:
        click.echo(json.dumps(view, indent=2))
        return

    children: dict[str | None, list[dict]] = {}
    for row in view["nodes"]:
        children.setdefault(row["parent"], []).append(row)

    def render(row: dict, depth: int) -> None:
        parts = [row["id"], row["status"]]
        if row["cost"] is not None:
            parts.append(f"cost {row['cost']}")
        if row["diffcost"] is not None:
            parts.append(f"diffcost {row['diffcost']}")
        if row["flagged"]:
            parts.append("[redundancy]")
        if row["question"]:
            parts.append(f"- {row['question']}")
        click.echo("  " * depth + " ".join(parts))
        for child in children.get(row["id"], ()):
            render(child, depth + 1)

    click.echo(f"session {view['session']}")
    for root in children.get(None, ()):
        render(root, 0)


@main.command(name="serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@guard
def serve_cmd(host: str, port: int):
    """Run the HTTP API (and the web UI when its build exists)."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(), host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
