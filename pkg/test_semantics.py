#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
语义模块测试：概念求值、模型检查、模型文本格式与有界模型搜索
"""

import pytest

from logic_core import (
    TOP, AtLeast, AtMost, Atomic, Exists, Forall, InternalConceptError, NegNominal,
    Nominal, OraclePreconditionError, ReasonerError, SuccEq,
)
from semantics import (
    Interpretation, brute_force_sat, check_model, eval_concept, format_model,
    parse_model_text, sorted_elements,
)
from test_utils import ReasonerTestUtils

A = Atomic("A")


def two_elements() -> Interpretation:
    return Interpretation(
        delta=("x", "y"),
        concept_names={"A": frozenset({"x"})},
        roles={"r": frozenset({("x", "y")})},
        individuals={"a": "x"},
    )


class TestEvaluation:

    def test_quantifiers(self):
        i = two_elements()
        assert eval_concept(Exists("r", TOP), i) == {"x"}
        assert eval_concept(Forall("r", A), i) == {"y"}
        assert eval_concept(AtMost(0, "r", TOP), i) == {"y"}
        assert eval_concept(AtLeast(1, "r", A), i) == frozenset()

    def test_nominals(self):
        i = two_elements()
        assert eval_concept(Nominal("a"), i) == {"x"}
        assert eval_concept(NegNominal("a"), i) == {"y"}

    def test_internal_forms_rejected(self):
        with pytest.raises(InternalConceptError):
            eval_concept(SuccEq(1, "r", A), two_elements())


class TestCheckModel:

    def test_model(self):
        kb = ReasonerTestUtils.kb("""
            abox a : A
            abox a : some r not A
        """)
        assert check_model(two_elements(), kb)

    def test_abox_violation(self):
        kb = ReasonerTestUtils.kb("abox a : not A")
        verdict = check_model(two_elements(), kb)
        assert not verdict
        assert verdict.violation == "ABox: a:¬A"

    def test_tbox_violation(self):
        kb = ReasonerTestUtils.kb("""
            tbox top sub some r top
            abox a : top
        """)
        verdict = check_model(two_elements(), kb)
        assert verdict.violation.startswith("TBox:")
        assert "y" in verdict.violation

    def test_rbox_violations(self):
        kb = ReasonerTestUtils.kb("""
            rbox r sub s
            abox a : top
        """)
        assert check_model(two_elements(), kb).violation == "RBox: r ⊑ s"
        kb = ReasonerTestUtils.kb("""
            rbox trans r
            abox a : top
        """)
        i = Interpretation(("x", "y", "z"), {}, {"r": frozenset({("x", "y"), ("y", "z")})}, {"a": "x"})
        assert check_model(i, kb).violation.startswith("RBox: Trans(r)")

    def test_unmapped_individual(self):
        kb = ReasonerTestUtils.kb("abox b : top")
        assert check_model(two_elements(), kb).violation == "个体 b 未映射到论域"


class TestModelText:

    def test_format(self):
        text = format_model(two_elements())
        assert text == "domain: x y\nindividuals: a=x\nconcept A: x\nrole r: x->y\n"
        assert parse_model_text(text) == two_elements()

    def test_anonymous_elements_sorted_by_number(self):
        assert sorted_elements(["_10", "b", "_2", "a"]) == ["a", "b", "_2", "_10"]

    def test_errors(self):
        with pytest.raises(ReasonerError, match="第1行"):
            parse_model_text("domain x y\n")
        with pytest.raises(ReasonerError, match="论域之外"):
            parse_model_text("domain: x\nconcept A: y\n")
        with pytest.raises(ReasonerError, match="domain"):
            parse_model_text("individuals: a=x\n")
        with pytest.raises(ReasonerError, match="第2行"):
            parse_model_text("domain: x\nrole r: x-x\n")


class TestBoundedSearch:

    def test_example2_has_small_model(self):
        kb = ReasonerTestUtils.load(ReasonerTestUtils.EXAMPLE2)
        search = brute_force_sat(kb, 4)
        assert search
        assert check_model(search.model, kb)

    @pytest.mark.parametrize("name", ["example1.kb", "nominal_merge.kb", "counting.kb", "role_hierarchy.kb"])
    def test_unsatisfiable_has_no_model(self, name):
        assert not brute_force_sat(ReasonerTestUtils.load(name), 3)

    def test_counting_needs_domain(self):
        kb = ReasonerTestUtils.kb("abox a : atleast 4 r top")
        assert not brute_force_sat(kb, 3)
        assert brute_force_sat(kb, 4)

    def test_distinct_individuals(self):
        kb = ReasonerTestUtils.kb("abox a != b")
        search = brute_force_sat(kb, 2)
        model = search.model
        assert model.individuals["a"] != model.individuals["b"]
        assert not brute_force_sat(kb, 1)

    def test_domain_bounds(self):
        kb = ReasonerTestUtils.kb("abox a : A")
        with pytest.raises(OraclePreconditionError):
            brute_force_sat(kb, 0)
        with pytest.raises(OraclePreconditionError):
            brute_force_sat(kb, 7)
