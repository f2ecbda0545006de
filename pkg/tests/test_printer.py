"""Round-trip guarantees: parse -> print -> parse yields equal structures."""

from __future__ import annotations

from xaip.parser import parse_domain, parse_plan, parse_problem
from xaip.printer import print_domain, print_plan, print_problem

from conftest import FIXTURES, load_warehouse


def test_domain_round_trip():
    dom, _ = load_warehouse()
    again = parse_domain(print_domain(dom))
    assert again == dom


def test_problem_round_trip():
    dom, prob = load_warehouse()
    again = parse_problem(print_problem(prob), dom)
    assert again == prob


def test_problem_with_tils_round_trip():
    dom, _ = load_warehouse()
    text = (FIXTURES / "warehouse_problem.pddl").read_text()
    text = text.replace("(robot_at Tom sh5)",
                        "(robot_at Tom sh5) (at 2.999 (robot_at Jerry sh4)) "
                        "(at 3.5 (not (not_occupied sh2)))")
    prob = parse_problem(text, dom)
    printed = print_problem(prob)
    assert "(at 2.999 (robot_at Jerry sh4))" in printed
    assert "(at 3.500 (not (not_occupied sh2)))" in printed
    assert parse_problem(printed, dom) == prob


def test_plan_round_trip():
    dom, prob = load_warehouse()
    for name in ("warehouse_plan.txt", "replacement_hplan.txt", "forced_unload_hplan.txt"):
        plan = parse_plan((FIXTURES / name).read_text(), dom, prob)
        printed = print_plan(plan)
        assert parse_plan(printed, dom, prob) == plan


def test_plan_formatting():
    dom, prob = load_warehouse()
    plan = parse_plan((FIXTURES / "warehouse_plan.txt").read_text(), dom, prob)
    lines = print_plan(plan).splitlines()
    assert lines[0] == "0.000: (goto_waypoint Tom sh5 sh6) [3.000]"
    assert all(": (" in line and line.endswith("]") for line in lines)


def test_printed_domain_is_stable():
    dom, _ = load_warehouse()
    once = print_domain(dom)
    assert print_domain(parse_domain(once)) == once
