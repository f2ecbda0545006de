"""Planner adapter tests: config validation, builtin dispatch, external subprocess handling.

External-mode tests use small throwaway python scripts as stand-in planners so
that plan extraction, scratch retention, timeouts and process-group cleanup can
be exercised without a real planner installed.
"""
from __future__ import annotations

import os
import shutil
import sys
import threading
import time
from fractions import Fraction
from pathlib import Path

import psutil
import pytest

from conftest import FIXTURES, load_warehouse
from xaip.compiler import HModel
from xaip.errors import PlannerConfigError
from xaip.planner import (
    BUILTIN,
    EXTERNAL,
    PLANNER_ENV,
    PlannerConfig,
    builtin_plan,
    default_config,
    plan,
)
from xaip.search import PLAN_FOUND, PLANNER_ERROR, TIMEOUT, UNSOLVABLE, SearchLimits
from xaip.validator import validate

PLAN_FIXTURE = FIXTURES / "warehouse_plan.txt"


def root_hmodel() -> HModel:
    dom, prob = load_warehouse()
    return HModel.root(dom, prob)


def script_command(tmp_path: Path, body: str, *extra_args: str) -> str:
    """Write a fake planner script and return a command template for it."""
    script = tmp_path / "fake_planner.py"
    script.write_text(body)
    parts = [sys.executable, str(script), "{domain}", "{problem}", *extra_args]
    return " ".join(parts)


def kept_scratch(log: str) -> Path:
    assert "[scratch directory kept at " in log, log
    tail = log.rsplit("[scratch directory kept at ", 1)[1]
    return Path(tail.rstrip().rstrip("]"))


class TestPlannerConfig:
    def test_unknown_mode_rejected(self):
        with pytest.raises(PlannerConfigError, match="mode"):
            PlannerConfig(mode="quantum")

    def test_unsupported_output_format_rejected(self):
        with pytest.raises(PlannerConfigError, match="output format"):
            PlannerConfig(output_format="xml")

    def test_nonpositive_timeout_rejected(self):
        with pytest.raises(PlannerConfigError, match="timeout"):
            PlannerConfig(timeout=0)
        with pytest.raises(PlannerConfigError, match="timeout"):
            PlannerConfig(timeout=-3.0)

    def test_external_requires_command(self):
        with pytest.raises(PlannerConfigError, match="command"):
            PlannerConfig(mode=EXTERNAL)

    def test_external_command_requires_placeholders(self):
        with pytest.raises(PlannerConfigError, match="placeholder"):
            PlannerConfig(mode=EXTERNAL, command="myplanner {domain}")
        with pytest.raises(PlannerConfigError, match="placeholder"):
            PlannerConfig(mode=EXTERNAL, command="myplanner --fast")

    def test_valid_configs_accepted(self):
        assert PlannerConfig().mode == BUILTIN
        cfg = PlannerConfig(mode=EXTERNAL, command="p {domain} {problem}", timeout=5)
        assert cfg.command == "p {domain} {problem}"


class TestDefaultConfig:
    def test_without_env_uses_builtin(self, monkeypatch):
        monkeypatch.delenv(PLANNER_ENV, raising=False)
        cfg = default_config(timeout=12.0)
        assert cfg.mode == BUILTIN
        assert cfg.timeout == 12.0

    def test_env_selects_external_command(self, monkeypatch):
        monkeypatch.setenv(PLANNER_ENV, "fancy-planner {domain} {problem}")
        cfg = default_config()
        assert cfg.mode == EXTERNAL
        assert cfg.command == "fancy-planner {domain} {problem}"


class TestBuiltinMode:
    def test_plan_solves_warehouse_root(self):
        hmodel = root_hmodel()
        outcome = plan(hmodel, PlannerConfig(timeout=10.0))
        assert outcome.ok and outcome.status == PLAN_FOUND
        assert outcome.plan.cost >= Fraction(20003, 1000)
        assert validate(hmodel.domain, hmodel.problem, outcome.plan).valid

    def test_expansion_limit_reports_timeout(self):
        dom, prob = load_warehouse()
        outcome = builtin_plan(dom, prob, limits=SearchLimits(max_expanded_states=2))
        assert outcome.status == TIMEOUT
        assert outcome.plan is None


class TestExternalMode:
    def test_plan_read_from_stdout(self, tmp_path):
        command = script_command(tmp_path, (
            "import sys\n"
            "print('fake planner v1, parsing inputs')\n"
            "sys.stdout.write(open(sys.argv[3]).read())\n"
            "print('search done')\n"
        ), str(PLAN_FIXTURE))
        hmodel = root_hmodel()
        outcome = plan(hmodel, PlannerConfig(mode=EXTERNAL, command=command, timeout=20))
        assert outcome.ok, outcome.planner_log
        assert outcome.plan.cost == Fraction(20003, 1000)
        assert len(outcome.plan.steps) == 13
        assert validate(hmodel.domain, hmodel.problem, outcome.plan).valid
        # success cleans up the scratch directory
        assert "[scratch directory kept at " not in outcome.planner_log

    def test_plan_read_from_solution_file(self, tmp_path):
        command = script_command(tmp_path, (
            "import sys\n"
            "d = open(sys.argv[1]).read()\n"
            "p = open(sys.argv[2]).read()\n"
            "assert '(define' in d and '(define' in p\n"
            "open('sol.1', 'w').write(open(sys.argv[3]).read())\n"
            "print('solution written to sol.1')\n"
        ), str(PLAN_FIXTURE))
        outcome = plan(root_hmodel(), PlannerConfig(mode=EXTERNAL, command=command, timeout=20))
        assert outcome.ok, outcome.planner_log
        assert outcome.plan.cost == Fraction(20003, 1000)

    def test_junk_output_is_planner_error_and_scratch_kept(self, tmp_path):
        command = script_command(tmp_path, (
            "print('thinking really hard')\n"
            "print('no structured output here')\n"
        ))
        outcome = plan(root_hmodel(), PlannerConfig(mode=EXTERNAL, command=command, timeout=20))
        assert outcome.status == PLANNER_ERROR
        assert "no plan found" in outcome.planner_log
        scratch = kept_scratch(outcome.planner_log)
        assert scratch.is_dir()
        assert (scratch / "domain.pddl").is_file()
        assert (scratch / "problem.pddl").is_file()
        shutil.rmtree(scratch)

    def test_nonzero_exit_is_planner_error(self, tmp_path):
        command = script_command(tmp_path, (
            "import sys\n"
            "print('segfault imminent')\n"
            "sys.exit(2)\n"
        ))
        outcome = plan(root_hmodel(), PlannerConfig(mode=EXTERNAL, command=command, timeout=20))
        assert outcome.status == PLANNER_ERROR
        assert "exited with a failure" in outcome.planner_log
        assert "exit code 2" in outcome.planner_log
        shutil.rmtree(kept_scratch(outcome.planner_log), ignore_errors=True)

    def test_unsolvable_marker_recognised(self, tmp_path):
        command = script_command(tmp_path, (
            "print('Problem is unsolvable.')\n"
        ))
        outcome = plan(root_hmodel(), PlannerConfig(mode=EXTERNAL, command=command, timeout=20))
        assert outcome.status == UNSOLVABLE
        assert outcome.plan is None
        shutil.rmtree(kept_scratch(outcome.planner_log), ignore_errors=True)

    def test_parseable_but_invalid_plan_is_planner_error(self, tmp_path):
        # parses fine, but Tom starts at sh5, not sh1
        command = script_command(tmp_path, (
            "print('0.000: (goto_waypoint Tom sh1 sh2) [4.000]')\n"
        ))
        outcome = plan(root_hmodel(), PlannerConfig(mode=EXTERNAL, command=command, timeout=20))
        assert outcome.status == PLANNER_ERROR
        assert "does not validate" in outcome.planner_log
        shutil.rmtree(kept_scratch(outcome.planner_log), ignore_errors=True)

    def test_missing_binary_is_planner_error(self):
        cfg = PlannerConfig(mode=EXTERNAL,
                            command="/nonexistent/planner {domain} {problem}", timeout=5)
        outcome = plan(root_hmodel(), cfg)
        assert outcome.status == PLANNER_ERROR
        assert "could not start planner" in outcome.planner_log
        if "(scratch kept at " in outcome.planner_log:
            tail = outcome.planner_log.rsplit("(scratch kept at ", 1)[1]
            shutil.rmtree(Path(tail.rstrip().rstrip(")")), ignore_errors=True)

    def test_timeout_kills_whole_process_group(self, tmp_path):
        marker = f"xaip-test-orphan-{os.getpid()}"
        command = script_command(tmp_path, (
            "import subprocess, sys, time\n"
            "subprocess.Popen([sys.executable, '-c',\n"
            "                  'import time; time.sleep(120)', sys.argv[3]])\n"
            "print('spawned helper', flush=True)\n"
            "time.sleep(120)\n"
        ), marker)
        started = time.monotonic()
        outcome = plan(root_hmodel(), PlannerConfig(mode=EXTERNAL, command=command, timeout=1))
        elapsed = time.monotonic() - started
        assert outcome.status == TIMEOUT
        assert "killed after" in outcome.planner_log
        assert elapsed < 10
        # the spawned helper shares the planner's process group and must die with it
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            alive = [p for p in psutil.process_iter(["cmdline"])
                     if marker in " ".join(p.info["cmdline"] or [])]
            if not alive:
                break
            time.sleep(0.1)
        assert not alive, f"orphaned planner children: {alive}"
        shutil.rmtree(kept_scratch(outcome.planner_log), ignore_errors=True)

    def test_cancel_event_stops_planner_early(self, tmp_path):
        command = script_command(tmp_path, (
            "import time\n"
            "print('starting', flush=True)\n"
            "time.sleep(120)\n"
        ))
        cancel = threading.Event()
        threading.Timer(0.3, cancel.set).start()
        started = time.monotonic()
        outcome = plan(root_hmodel(),
                       PlannerConfig(mode=EXTERNAL, command=command, timeout=60),
                       cancel=cancel)
        elapsed = time.monotonic() - started
        assert outcome.status == TIMEOUT
        assert elapsed < 10
        shutil.rmtree(kept_scratch(outcome.planner_log), ignore_errors=True)
