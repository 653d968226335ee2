#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
描述逻辑核心模块测试
"""

import pytest

from kb_parser import build_rbox_closure, parse_concept
from logic_core import (
    BOT, TOP, And, AtLeast, AtMost, Atomic, Eq, Exists, Forall, Instance,
    InternalConceptError, NegAtomic, NegNominal, Nominal, Not, Or, PrecEq,
    RoleAssertion, SuccEq, canonical, closure, closure_violations, is_nnf,
    negate_formula, negate_nnf, nnf, relevant_atmost_one, show_concept,
    show_formula, substitute_formula,
)
from test_utils import ReasonerTestUtils

A, B = Atomic("A"), Atomic("B")


class TestNnf:

    def test_pushes_negation_inward(self):
        c = Not(And(A, Exists("r", B)))
        assert nnf(c) == Or(NegAtomic("A"), Forall("r", NegAtomic("B")))

    def test_number_restrictions(self):
        assert nnf(Not(AtLeast(3, "r", A))) == AtMost(2, "r", A)
        assert nnf(Not(AtMost(2, "r", A))) == AtLeast(3, "r", A)
        assert nnf(Not(AtLeast(0, "r", A))) == BOT

    def test_nominals_and_constants(self):
        assert nnf(Not(Nominal("a"))) == NegNominal("a")
        assert nnf(Not(TOP)) == BOT
        assert nnf(Not(Not(A))) == A

    def test_nnf_is_identity_on_nnf(self):
        c = And(Or(A, NegAtomic("B")), AtMost(1, "r", Nominal("a")))
        assert is_nnf(c)
        assert nnf(c) == c

    def test_negate_twice(self):
        for c in (A, Exists("r", Or(A, B)), AtMost(2, "s", NegNominal("a")), AtLeast(1, "r", TOP)):
            assert negate_nnf(negate_nnf(c)) == c

    def test_internal_forms_have_no_negation(self):
        with pytest.raises(InternalConceptError):
            negate_nnf(SuccEq(1, "r", A))
        with pytest.raises(InternalConceptError):
            negate_nnf(Exists("r", PrecEq(0, "r", A)))

    def test_negate_formula(self):
        assert negate_formula(Instance("a", A)) == Instance("a", NegAtomic("A"))
        with pytest.raises(TypeError):
            negate_formula(RoleAssertion("r", "a", "b"))


class TestDisplay:

    def test_show_concept(self):
        assert show_concept(AtLeast(3, "r", Forall("r", NegAtomic("A")))) == "≥3 r.∀r.¬A"
        assert show_concept(Or(A, Nominal("a"))) == "(A ⊔ {a})"
        assert show_concept(SuccEq(2, "r", TOP)) == "⪰2 r.⊤"

    def test_show_formula(self):
        assert show_formula(Instance("a", A)) == "a:A"
        assert show_formula(RoleAssertion("r", "a", "b")) == "r(a,b)"
        assert show_formula(Eq("a", "b")) == "a≐b"


class TestCanonicalOrder:

    def test_concepts_before_assertions(self):
        formulas = [Instance("a", A), RoleAssertion("r", "a", "b"), B, A]
        assert canonical(formulas) == [A, B, Instance("a", A), RoleAssertion("r", "a", "b")]

    def test_order_independent_of_input_order(self):
        formulas = [Exists("r", A), AtMost(1, "r", A), Or(A, B), NegAtomic("A"), TOP]
        assert canonical(formulas) == canonical(list(reversed(formulas)))
        assert canonical(formulas)[0] == TOP


class TestSubstitution:

    def test_substitutes_nominals_and_individuals(self):
        f = Instance("b", Exists("r", Nominal("b")))
        assert substitute_formula(f, {"b": "a"}) == Instance("a", Exists("r", Nominal("a")))

    def test_keeps_equalities(self):
        assert substitute_formula(Eq("b", "c"), {"b": "a"}, keep_equalities=True) == Eq("b", "c")
        assert substitute_formula(Eq("b", "c"), {"b": "a"}) == Eq("a", "c")


class TestRelevantAtMostOne:

    def test_at_least_two_with_nominal_filler(self):
        rbox = build_rbox_closure([], ["r"])
        result = relevant_atmost_one([], [AtLeast(2, "r", Nominal("a"))], rbox)
        assert result == frozenset({AtMost(1, "r", Nominal("a"))})

    def test_two_existentials_share_super_role(self):
        rbox = build_rbox_closure([], ["r"])
        concepts = [And(Exists("r", Nominal("a")), Exists("r", B))]
        assert AtMost(1, "r", Nominal("a")) in relevant_atmost_one([], concepts, rbox)

    def test_single_existential_is_not_relevant(self):
        rbox = build_rbox_closure([], ["r"])
        assert relevant_atmost_one([], [Exists("r", Nominal("a"))], rbox) == frozenset()

    def test_nested_nominal_is_not_depth_zero(self):
        rbox = build_rbox_closure([], ["r"])
        concepts = [AtLeast(2, "r", Exists("r", Nominal("a")))]
        assert relevant_atmost_one([], concepts, rbox) == frozenset()


class TestClosure:

    @pytest.mark.parametrize("name", sorted(ReasonerTestUtils.CORPUS))
    def test_closure_properties(self, name):
        kb = ReasonerTestUtils.load(name)
        gamma = closure(kb)
        assert closure_violations(gamma, kb) == []

    def test_closure_size_is_polynomial(self):
        kb = ReasonerTestUtils.load(ReasonerTestUtils.EXAMPLE1)
        gamma = closure(kb)
        assert 0 < len(gamma) <= 10 * (kb.size + 1) ** 3

    def test_closure_contains_internal_forms(self):
        kb = ReasonerTestUtils.kb("abox a : atmost 2 r A")
        gamma = closure(kb)
        assert PrecEq(2, "r", A) in gamma.concepts
        assert PrecEq(0, "r", A) in gamma.concepts
        assert AtMost(1, "r", Nominal("a")) in gamma.concepts
        assert Instance("a", negate_nnf(A)) in gamma

    def test_parse_concept_round_trip_through_nnf(self):
        assert parse_concept("not (A and some r B)") == Or(NegAtomic("A"), Forall("r", NegAtomic("B")))
