#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
知识库解析与校验测试
"""

import pytest

from kb_parser import (
    RBoxAxiom, TBoxAxiom, build_rbox_closure, format_kb, load_kb, make_kb,
    parse_concept, parse_kb,
)
from logic_core import (
    TOP, And, AtLeast, AtMost, Atomic, Exists, Forall, Instance, KBSyntaxError,
    KBValidationError, NegAtomic, NegNominal, Nominal, NotEq, Or, RoleAssertion,
)
from test_utils import ReasonerTestUtils

A, B = Atomic("A"), Atomic("B")


class TestParseKb:

    def test_example1(self):
        kb = ReasonerTestUtils.load(ReasonerTestUtils.EXAMPLE1)
        assert len(kb.abox) == 8
        assert kb.individuals == ("a", "b")
        assert kb.roles == frozenset({"r"})
        assert Instance("a", AtLeast(3, "r", Forall("r", NegAtomic("A")))) in kb.abox
        assert RoleAssertion("r", "a", "b") in kb.abox
        expected = Instance("b", Or(Forall("r", And(NegAtomic("A"), NegNominal("a"))), NegAtomic("B")))
        assert expected in kb.abox

    def test_concepts_are_converted_to_nnf(self):
        kb = ReasonerTestUtils.kb("abox a : not (A or some r B)")
        assert kb.abox == (Instance("a", And(NegAtomic("A"), Forall("r", NegAtomic("B")))),)

    def test_duplicates_removed_in_input_order(self):
        kb = ReasonerTestUtils.kb("""
            abox b : B
            abox a : A
            abox b : B
        """)
        assert kb.abox == (Instance("b", B), Instance("a", A))
        assert kb.individuals == ("b", "a")

    def test_comments_and_blank_lines(self):
        kb = ReasonerTestUtils.kb("""
            # comment

            abox a : A   # trailing
        """)
        assert kb.abox == (Instance("a", A),)

    def test_inequality_and_role_assertion(self):
        kb = ReasonerTestUtils.kb("""
            abox a != b
            abox r(a, b)
        """)
        assert NotEq("a", "b") in kb.abox
        assert RoleAssertion("r", "a", "b") in kb.abox

    def test_tbox_encoding(self):
        kb = ReasonerTestUtils.kb("""
            tbox A sub B
            abox a : top
        """)
        assert kb.tbox == frozenset({Or(NegAtomic("A"), B)})
        kb = ReasonerTestUtils.kb("""
            tbox A equiv B
            abox a : top
        """)
        assert kb.tbox == frozenset({And(Or(NegAtomic("A"), B), Or(NegAtomic("B"), A))})

    def test_empty_abox_gets_auxiliary_individual(self):
        kb = parse_kb("tbox A sub B\n")
        assert kb.abox == (Instance("aux", TOP),)
        assert "aux" in kb.individuals

    def test_auxiliary_name_avoids_clash(self):
        kb = parse_kb("tbox A sub some r one aux\n")
        assert kb.abox == (Instance("aux1", TOP),)

    def test_nominals_register_individuals(self):
        kb = ReasonerTestUtils.kb("abox a : some r one c")
        assert kb.individuals == ("a", "c")


class TestRBox:

    def test_reflexive_transitive_closure(self):
        rbox = build_rbox_closure([RBoxAxiom("sub", "s", "r"), RBoxAxiom("sub", "t", "s")], [])
        assert rbox.is_subrole("t", "r")
        assert rbox.is_subrole("r", "r")
        assert not rbox.is_subrole("r", "t")
        assert rbox.supers("t") == frozenset({"t", "s", "r"})
        assert rbox.subroles("r") == frozenset({"r", "s", "t"})

    def test_simple_roles(self):
        rbox = build_rbox_closure([RBoxAxiom("sub", "s", "r"), RBoxAxiom("trans", "s")], [])
        assert not rbox.is_simple("s")
        assert not rbox.is_simple("r")
        rbox = build_rbox_closure([RBoxAxiom("sub", "s", "r"), RBoxAxiom("trans", "r")], [])
        assert rbox.is_simple("s")
        assert not rbox.is_simple("r")

    def test_numeric_roles_include_subroles(self):
        kb = ReasonerTestUtils.kb("""
            rbox s sub r
            abox a : atmost 1 r A
            abox a : some t B
        """)
        assert kb.numeric_roles == frozenset({"r", "s"})
        assert not kb.is_numeric("t")


class TestErrors:

    def test_non_simple_role_rejected(self):
        with pytest.raises(KBValidationError, match="non-simple role"):
            ReasonerTestUtils.load("non_simple.kb")

    def test_non_simple_through_subrole(self):
        with pytest.raises(KBValidationError):
            ReasonerTestUtils.kb("""
                rbox s sub r
                rbox trans s
                abox a : atmost 1 r A
            """)

    @pytest.mark.parametrize("text,line,column", [
        ("abox a : (A and B", 1, 18),
        ("abox a A", 1, 8),
        ("box a : A", 1, 1),
        ("abox a : A\nabox b : some r", 2, 16),
        ("abox a : atleast x r A", 1, 18),
        ("abox a : A B", 1, 12),
        ("abox a : A $", 1, 12),
        ("abox a : and", 1, 10),
    ])
    def test_syntax_errors_report_position(self, text, line, column):
        with pytest.raises(KBSyntaxError) as info:
            parse_kb(text + "\n")
        assert info.value.line == line
        assert info.value.column == column

    def test_number_overflow(self):
        with pytest.raises(KBSyntaxError, match="溢出"):
            parse_kb("abox a : atleast 99999999999999999999 r A\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_kb(str(tmp_path / "missing.kb"))


class TestFormat:

    @pytest.mark.parametrize("name", sorted(ReasonerTestUtils.CORPUS))
    def test_format_is_reparsable(self, name):
        kb = ReasonerTestUtils.load(name)
        again = parse_kb(format_kb(kb))
        assert again.abox == kb.abox
        assert again.tbox == kb.tbox
        assert again.rbox == kb.rbox

    def test_make_kb_matches_parser(self):
        built = make_kb([RBoxAxiom("trans", "r")], [TBoxAxiom("sub", A, Exists("r", A))],
                        [Instance("a", A)], ["a"])
        parsed = ReasonerTestUtils.kb("""
            rbox trans r
            tbox A sub some r A
            abox a : A
        """)
        assert built.abox == parsed.abox
        assert built.tbox == parsed.tbox
        assert built.rbox.transitive == parsed.rbox.transitive

    def test_parse_concept(self):
        assert parse_concept("atmost 1 r one a") == AtMost(1, "r", Nominal("a"))
