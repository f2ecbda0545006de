"""Planner adapter.

Produces plans for hypothetical models either with the built-in temporal
search or by driving an external PDDL 2.1 planner as a subprocess.  External
planners get the model written to a scratch directory, their process group is
killed at timeout, and the first well-formed timed-plan block found in stdout
or in any file they write is taken as the plan.  Every plan-found outcome is
validated against the model it was planned for before being returned; a plan
that does not validate is reported as a planner error, never returned.
"""

from __future__ import annotations

import os
import shlex
import shutil
import signal
import subprocess
import tempfile
import threading
import time as _wallclock
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .compiler import HModel
from .errors import PddlSyntaxError, PddlSemanticError, PlanFormatError, PlannerConfigError
from .model import AT_END, AT_START, OVER_ALL, Atom, Domain, Problem, TimedPlan, instantiate
from .parser import parse_plan
from .printer import print_domain, print_problem
from .search import (
    PLAN_FOUND,
    PLANNER_ERROR,
    TIMEOUT,
    UNSOLVABLE,
    SearchLimits,
    run_search,
)
from .validator import validate

BUILTIN = "builtin"
EXTERNAL = "external"

TIMED_PLAN_LINES = "timed-plan-lines"

# environment variable holding an external planner command template
PLANNER_ENV = "XAIP_PLANNER"

_UNSOLVABLE_MARKERS = (
    "unsolvable",
    "no solution",
    "no plan",
    "goal can be simplified to false",
    "problem has been proven unsolvable",
)


@dataclass(frozen=True)
class PlannerConfig:
    """How to produce plans: the builtin engine or an external command.

    command is a template whose {domain} and {problem} placeholders are
    replaced by the paths of the written model files.
    """

    mode: str = BUILTIN
    command: str | None = None
    timeout: float = 60.0
    output_format: str = TIMED_PLAN_LINES
    builtin_limits: SearchLimits = field(default_factory=SearchLimits)

    def __post_init__(self) -> None:
        if self.mode not in (BUILTIN, EXTERNAL):
            raise PlannerConfigError(f"unknown planner mode {self.mode!r}")
        if self.output_format != TIMED_PLAN_LINES:
            raise PlannerConfigError(f"unsupported output format {self.output_format!r}")
        if self.timeout <= 0:
            raise PlannerConfigError("planner timeout must be positive")
        if self.mode == EXTERNAL:
            if not self.command:
                raise PlannerConfigError("external mode requires a planner command")
            if "{domain}" not in self.command or "{problem}" not in self.command:
                raise PlannerConfigError(
                    "planner command must contain {domain} and {problem} placeholders")


@dataclass(frozen=True)
class PlanningOutcome:
    status: str  # plan-found | unsolvable | timeout | planner-error
    plan: TimedPlan | None
    planner_log: str

    @property
    def ok(self) -> bool:
        return self.status == PLAN_FOUND


def default_config(timeout: float = 60.0) -> PlannerConfig:
    """External config from the environment when set, builtin otherwise."""
    command = os.environ.get(PLANNER_ENV)
    if command:
        return PlannerConfig(mode=EXTERNAL, command=command, timeout=timeout)
    return PlannerConfig(timeout=timeout)


def _splice_guards(hmodel: HModel):
    """Constraints a plan tail must respect around the splice instant.

    When the model's timeline starts where a frozen plan prefix is still
    active, the prefix contributes events at relative time 0 (starts and ends
    landing exactly there) and invariant windows of steps still executing.
    Neither is expressible in the projected problem itself, so they are handed
    to the builtin search as side constraints.
    """
    if not hmodel.plan_prefix or hmodel.time_origin <= 0:
        return (), ()
    origin = hmodel.time_origin
    now_events: list[tuple[tuple[Atom, ...], tuple[Atom, ...], tuple[Atom, ...]]] = []
    hold_until: list[tuple[Fraction, tuple[Atom, ...]]] = []
    for step in hmodel.plan_prefix:
        schema = hmodel.domain.action(step.action.name)
        conds, effs = instantiate(schema, step.action.args)
        end = step.time + step.duration
        if step.time == origin:
            now_events.append((
                tuple(c.atom for c in conds if c.when == AT_START),
                tuple(e.literal.atom for e in effs if e.when == AT_START and e.literal.positive),
                tuple(e.literal.atom for e in effs if e.when == AT_START and not e.literal.positive),
            ))
        if end == origin:
            now_events.append((
                tuple(c.atom for c in conds if c.when == AT_END),
                tuple(e.literal.atom for e in effs if e.when == AT_END and e.literal.positive),
                tuple(e.literal.atom for e in effs if e.when == AT_END and not e.literal.positive),
            ))
        if end > origin:
            invariant = tuple(c.atom for c in conds if c.when == OVER_ALL)
            if invariant:
                hold_until.append((end - origin, invariant))
    return tuple(now_events), tuple(hold_until)


def builtin_plan(domain: Domain, problem: Problem,
                 limits: SearchLimits | None = None,
                 timeout: float | None = None,
                 cancel: threading.Event | None = None,
                 now_events=(), hold_until=()) -> PlanningOutcome:
    """Run the built-in planner and validate what it finds."""
    result = run_search(domain, problem, limits=limits, timeout=timeout, cancel=cancel,
                        now_events=now_events, hold_until=hold_until)
    if result.status != PLAN_FOUND:
        return PlanningOutcome(result.status, None, result.message)
    report = validate(domain, problem, result.plan)
    if not report.valid:
        return PlanningOutcome(
            PLANNER_ERROR, None,
            f"builtin planner produced an invalid plan: {report.failure.reason} "
            f"at {report.failure.time}: {report.failure.detail}")
    return PlanningOutcome(PLAN_FOUND, result.plan, result.message)


def plan(hmodel: HModel, config: PlannerConfig | None = None,
         cancel: threading.Event | None = None) -> PlanningOutcome:
    """Produce a plan for the hypothetical model, or a non-plan status."""
    config = config or default_config()
    now_events, hold_until = _splice_guards(hmodel)
    if config.mode == BUILTIN:
        return builtin_plan(hmodel.domain, hmodel.problem,
                            limits=config.builtin_limits, timeout=config.timeout,
                            cancel=cancel, now_events=now_events, hold_until=hold_until)
    return _external_plan(hmodel, config, cancel)


def _kill_group(proc: subprocess.Popen) -> None:
    # the child runs in its own session, so its pid is the process group id
    try:
        os.killpg(proc.pid, signal.SIGTERM)
    except ProcessLookupError:
        return
    try:
        proc.wait(timeout=2)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(proc.pid, signal.SIGKILL)
        except ProcessLookupError:
            pass
        proc.wait()


def _plan_blocks(text: str) -> list[str]:
    """Maximal runs of consecutive timed-plan-looking lines, in order."""
    blocks: list[str] = []
    current: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        looks_timed = ":" in stripped and "(" in stripped and stripped[0].isdigit()
        if looks_timed:
            current.append(stripped)
        elif current:
            blocks.append("\n".join(current))
            current = []
    if current:
        blocks.append("\n".join(current))
    return blocks


def _extract_plan(texts: list[str], domain: Domain, problem: Problem) -> TimedPlan | None:
    for text in texts:
        for block in _plan_blocks(text):
            try:
                return parse_plan(block, domain, problem)
            except (PddlSyntaxError, PddlSemanticError, PlanFormatError):
                continue
    return None


def _external_plan(hmodel: HModel, config: PlannerConfig,
                   cancel: threading.Event | None) -> PlanningOutcome:
    scratch = Path(tempfile.mkdtemp(prefix="xaip-planner-"))
    domain_path = scratch / "domain.pddl"
    problem_path = scratch / "problem.pddl"
    domain_path.write_text(print_domain(hmodel.domain))
    problem_path.write_text(print_problem(hmodel.problem))
    pre_existing = {p.name for p in scratch.iterdir()}

    argv = [
        token.replace("{domain}", str(domain_path)).replace("{problem}", str(problem_path))
        for token in shlex.split(config.command)
    ]
    try:
        proc = subprocess.Popen(
            argv, stdout=subprocess.PIPE, stderr=subprocess.STDOUT,
            text=True, cwd=scratch, start_new_session=True)
    except OSError as exc:
        return PlanningOutcome(
            PLANNER_ERROR, None,
            f"could not start planner {argv[0]!r}: {exc} (scratch kept at {scratch})")

    deadline = _wallclock.monotonic() + config.timeout
    output = ""
    status: str | None = None
    while True:
        try:
            output, _ = proc.communicate(timeout=0.05)
            break
        except subprocess.TimeoutExpired:
            if cancel is not None and cancel.is_set():
                _kill_group(proc)
                status = TIMEOUT
                output = _drain(proc)
                break
            if _wallclock.monotonic() > deadline:
                _kill_group(proc)
                status = TIMEOUT
                output = _drain(proc)
                break

    log_tail = f"\n[scratch directory kept at {scratch}]"
    if status == TIMEOUT:
        return PlanningOutcome(
            TIMEOUT, None,
            f"planner killed after {config.timeout}s\n{output}{log_tail}")

    texts = [output]
    for entry in sorted(scratch.iterdir(), key=lambda p: p.name):
        if entry.name in pre_existing or not entry.is_file():
            continue
        try:
            texts.append(entry.read_text())
        except (OSError, UnicodeDecodeError):
            continue

    found = _extract_plan(texts, hmodel.domain, hmodel.problem)
    if found is None:
        lowered = output.lower()
        if any(marker in lowered for marker in _UNSOLVABLE_MARKERS):
            return PlanningOutcome(UNSOLVABLE, None, output + log_tail)
        reason = ("planner exited with a failure"
                  if proc.returncode not in (0, None) else "no plan found in planner output")
        return PlanningOutcome(
            PLANNER_ERROR, None,
            f"{reason} (exit code {proc.returncode})\n{output}{log_tail}")

    report = validate(hmodel.domain, hmodel.problem, found)
    if not report.valid:
        return PlanningOutcome(
            PLANNER_ERROR, None,
            f"planner output does not validate against the model: "
            f"{report.failure.reason} at {report.failure.time}: {report.failure.detail}"
            f"\n{output}{log_tail}")

    shutil.rmtree(scratch, ignore_errors=True)
    return PlanningOutcome(PLAN_FOUND, found, output)


def _drain(proc: subprocess.Popen) -> str:
    try:
        out, _ = proc.communicate(timeout=2)
        return out or ""
    except subprocess.TimeoutExpired:
        return ""


__all__ = [
    "BUILTIN", "EXTERNAL", "TIMED_PLAN_LINES", "PLANNER_ENV",
    "PlannerConfig", "PlanningOutcome", "default_config", "plan", "builtin_plan",
]
