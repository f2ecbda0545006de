"""Parsing the supported PDDL subset and rejecting everything outside it."""

from __future__ import annotations

from fractions import Fraction

import pytest

from xaip.errors import (
    PddlSemanticError,
    PddlSyntaxError,
    PlanFormatError,
    UnsupportedConstructError,
)
from xaip.model import AT_END, AT_START, OVER_ALL, Atom
from xaip.parser import parse_domain, parse_plan, parse_problem

from conftest import FIXTURES, load_warehouse


class TestDomain:
    def test_fixture_domain(self):
        dom, _ = load_warehouse()
        assert dom.name == "warehouse"
        assert {a.name for a in dom.actions} == {
            "goto_waypoint", "scan_shelf", "load_pallet", "unload_pallet"}
        assert len(dom.predicates) == 7
        assert [f.name for f in dom.functions] == ["travel_time"]

    def test_typed_hierarchy(self):
        dom, _ = load_warehouse()
        assert dom.conforms("robot", "locatable")
        assert dom.conforms("waypoint", "locatable")
        assert not dom.conforms("pallet", "locatable")
        assert dom.conforms("robot", "object")

    def test_condition_slots(self):
        dom, _ = load_warehouse()
        goto = dom.action("goto_waypoint")
        whens = sorted(c.when for c in goto.conditions)
        assert whens == [AT_START, AT_START, OVER_ALL]
        load = dom.action("load_pallet")
        assert any(c.when == OVER_ALL and c.atom.predicate == "robot_at"
                   for c in load.conditions)
        unload = dom.action("unload_pallet")
        assert any(e.when == AT_END for e in unload.effects)

    def test_duration_fluent(self):
        dom, prob = load_warehouse()
        goto = dom.action("goto_waypoint")
        binding = {"?v": "Tom", "?from": "sh5", "?to": "sh6"}
        assert goto.duration.evaluate(binding, prob.function_values()) == Fraction(3)

    def test_duplicate_action_rejected(self):
        text = """(define (domain d) (:requirements :typing :durative-actions)
          (:types t) (:predicates (p ?x - t))
          (:durative-action a :parameters (?x - t) :duration (= ?duration 1)
            :condition (and (at start (p ?x))) :effect (and (at end (p ?x))))
          (:durative-action a :parameters (?x - t) :duration (= ?duration 1)
            :condition (and (at start (p ?x))) :effect (and (at end (p ?x)))))"""
        with pytest.raises(PddlSemanticError, match="duplicate"):
            parse_domain(text)

    def test_unknown_parameter_type(self):
        text = """(define (domain d) (:requirements :typing :durative-actions)
          (:types t) (:predicates (p ?x - t))
          (:durative-action a :parameters (?x - bogus) :duration (= ?duration 1)
            :condition (and (at start (p ?x))) :effect (and (at end (p ?x)))))"""
        with pytest.raises(PddlSemanticError, match="bogus"):
            parse_domain(text)

    def test_unbound_variable_in_body(self):
        text = """(define (domain d) (:requirements :typing :durative-actions)
          (:types t) (:predicates (p ?x - t))
          (:durative-action a :parameters (?x - t) :duration (= ?duration 1)
            :condition (and (at start (p ?y))) :effect (and (at end (p ?x)))))"""
        with pytest.raises(PddlSemanticError, match=r"\?y"):
            parse_domain(text)


class TestUnsupported:
    def rejects(self, text, needle):
        with pytest.raises(UnsupportedConstructError) as err:
            parse_domain(text)
        assert needle in str(err.value)
        assert err.value.line is not None

    def test_plain_action(self):
        self.rejects("""(define (domain d) (:predicates (p))
            (:action a :parameters () :precondition (p) :effect (p)))""", ":action")

    def test_conditional_effect(self):
        self.rejects("""(define (domain d) (:requirements :durative-actions)
          (:predicates (p) (q))
          (:durative-action a :parameters () :duration (= ?duration 1)
            :condition (and (at start (p)))
            :effect (and (at end (when (p) (q))))))""", "when")

    def test_quantifier(self):
        self.rejects("""(define (domain d) (:requirements :durative-actions) (:types t)
          (:predicates (p ?x - t))
          (:durative-action a :parameters () :duration (= ?duration 1)
            :condition (and (at start (forall (?x - t) (p ?x))))
            :effect (and (at end (p ?x)))))""", "forall")

    def test_derived_predicate(self):
        self.rejects("""(define (domain d) (:predicates (p) (q))
          (:derived (q) (p)))""", ":derived")

    def test_negative_condition(self):
        self.rejects("""(define (domain d) (:requirements :durative-actions)
          (:predicates (p))
          (:durative-action a :parameters () :duration (= ?duration 1)
            :condition (and (at start (not (p))))
            :effect (and (at end (p)))))""", "not")

    def test_constants_block(self):
        self.rejects("""(define (domain d) (:types t) (:constants c - t)
          (:predicates (p ?x - t)))""", ":constants")

    def test_duration_inequality(self):
        self.rejects("""(define (domain d) (:requirements :durative-actions)
          (:predicates (p))
          (:durative-action a :parameters () :duration (<= ?duration 5)
            :condition (and (at start (p))) :effect (and (at end (p)))))""",
                     "duration inequality")

    def test_metric_in_problem(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        text = text.replace("(:goal", "(:metric minimize (total-time))\n  (:goal")
        with pytest.raises(UnsupportedConstructError, match=":metric"):
            parse_problem(text, dom)

    def test_negated_init_literal(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        text = text.replace("(robot_at Jerry sh3)", "(not (robot_at Jerry sh3))")
        with pytest.raises(UnsupportedConstructError):
            parse_problem(text, dom)

    def test_error_carries_position(self):
        try:
            parse_domain("(define (domain d) (:predicates (p))\n  (:action a))")
        except UnsupportedConstructError as err:
            assert err.line == 2
            assert "line 2" in str(err)
        else:
            pytest.fail("expected rejection")


class TestProblem:
    def test_fixture_problem(self):
        dom, prob = load_warehouse()
        assert prob.name == "warehouse_delivery"
        assert len(prob.objects) == 10
        assert prob.object_type("Tom") == "robot"
        assert len(prob.init) == 22
        assert len(prob.function_init) == 12
        assert prob.function_values()[("travel_time", ("sh5", "sh6"))] == Fraction(3)
        goals = {str(l.atom) for l in prob.goal}
        assert goals == {"(pallet_at p1 sh6)", "(pallet_at p2 sh1)"}

    def test_domain_name_mismatch(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        with pytest.raises(PddlSemanticError, match="domain"):
            parse_problem(text.replace("(:domain warehouse)", "(:domain other)"), dom)

    def test_til_parsing(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        text = text.replace("(:goal", "(:init-marker)\n  (:goal").replace(
            "(:init-marker)", "")
        text = text.replace("(robot_at Tom sh5)",
                            "(robot_at Tom sh5) (at 2.5 (not (not_occupied sh4)))")
        prob = parse_problem(text, dom)
        assert len(prob.tils) == 1
        til = prob.tils[0]
        assert til.time == Fraction("2.5")
        assert not til.literal.positive
        assert str(til.literal.atom) == "(not_occupied sh4)"

    def test_til_time_must_be_positive(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        text = text.replace("(robot_at Tom sh5)",
                            "(robot_at Tom sh5) (at 0 (not_occupied sh4))")
        with pytest.raises(PddlSemanticError, match="positive"):
            parse_problem(text, dom)

    def test_unknown_object_in_goal(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        with pytest.raises(PddlSemanticError):
            parse_problem(text.replace("(pallet_at p2 sh1)", "(pallet_at p2 sh9)"), dom)

    def test_arity_mismatch(self):
        dom, _ = load_warehouse()
        text = (FIXTURES / "warehouse_problem.pddl").read_text()
        with pytest.raises(PddlSemanticError):
            parse_problem(text.replace("(pallet_at p2 sh1)", "(pallet_at p2)"), dom)

    def test_syntax_error_position(self):
        with pytest.raises(PddlSyntaxError) as err:
            parse_domain("(define (domain d) (:predicates (p))")
        assert err.value.line is not None


class TestPlan:
    def test_fixture_plan(self):
        dom, prob = load_warehouse()
        plan = parse_plan((FIXTURES / "warehouse_plan.txt").read_text(), dom, prob)
        assert len(plan) == 13
        assert plan.cost == Fraction("20.003")
        first = plan.steps[0]
        assert str(first.action) == "(goto_waypoint Tom sh5 sh6)"
        assert first.time == Fraction(0) and first.duration == Fraction(3)

    def test_steps_sorted_by_time(self):
        dom, prob = load_warehouse()
        plan = parse_plan((FIXTURES / "replacement_hplan.txt").read_text(), dom, prob)
        times = [s.time for s in plan.steps]
        assert times == sorted(times)

    def test_comments_and_blank_lines(self):
        dom, prob = load_warehouse()
        text = "; header\n\n0.0: (goto_waypoint Tom sh5 sh6) [3.0] ; trailing\n"
        plan = parse_plan(text, dom, prob)
        assert len(plan) == 1

    def test_empty_file_is_empty_plan(self):
        dom, prob = load_warehouse()
        assert len(parse_plan("; nothing\n", dom, prob)) == 0

    def test_malformed_line(self):
        dom, prob = load_warehouse()
        with pytest.raises(PlanFormatError, match="line 2"):
            parse_plan("0.0: (goto_waypoint Tom sh5 sh6) [3.0]\nnot a step\n", dom, prob)

    def test_missing_duration(self):
        dom, prob = load_warehouse()
        with pytest.raises(PlanFormatError):
            parse_plan("0.0: (goto_waypoint Tom sh5 sh6)\n", dom, prob)

    def test_unknown_action(self):
        dom, prob = load_warehouse()
        with pytest.raises(PlanFormatError, match="teleport"):
            parse_plan("0.0: (teleport Tom sh1) [1.0]\n", dom, prob)

    def test_wrong_argument_type(self):
        dom, prob = load_warehouse()
        with pytest.raises(PlanFormatError):
            parse_plan("0.0: (goto_waypoint Tom sh5 p1) [3.0]\n", dom, prob)

    def test_case_insensitive_object_fallback(self):
        dom, prob = load_warehouse()
        plan = parse_plan("0.0: (goto_waypoint tom sh5 sh6) [3.0]\n", dom, prob)
        assert plan.steps[0].action.args == ("Tom", "sh5", "sh6")
