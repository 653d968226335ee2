#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
模型抽取测试：饱和路径、模型图条件与对应模型
"""

import pytest

from kb_parser import RBoxAxiom, build_rbox_closure
from logic_core import (
    BOT, And, AtMost, Atomic, Exists, ExtractionError, NegAtomic, Nominal, Or,
)
from model_extraction import (
    ModelGraph, check_model_graph, corresponding_model, extract_model, saturation_path,
)
from semantics import check_model
from tableau_graph import StatusKind
from test_utils import ReasonerTestUtils

A, B = Atomic("A"), Atomic("B")
SAT_CORPUS = sorted(name for name, sat in ReasonerTestUtils.CORPUS.items() if sat)


def extracted(name):
    kb = ReasonerTestUtils.load(name)
    result = ReasonerTestUtils.run(kb)
    assert result.satisfiable
    return kb, result, extract_model(result.graph, kb)


class TestExtraction:

    @pytest.mark.parametrize("name", SAT_CORPUS)
    def test_model_graph_conditions(self, name):
        kb, _, m = extracted(name)
        assert check_model_graph(m, kb) == []

    @pytest.mark.parametrize("name", SAT_CORPUS)
    def test_corresponding_model_is_a_model(self, name):
        kb, _, m = extracted(name)
        model = corresponding_model(m, kb.rbox)
        verdict = check_model(model, kb)
        assert verdict, verdict.violation

    def test_example2_individuals(self):
        kb, _, m = extracted(ReasonerTestUtils.EXAMPLE2)
        assert set(m.individuals) == {"a", "b"}
        assert set(m.individuals.values()) <= set(m.delta)
        model = corresponding_model(m, kb.rbox)
        # a 至少有 3 个 r 后继
        assert len({y for x, y in model.role("r") if x == m.individuals["a"]}) >= 3

    def test_deterministic(self):
        _, _, first = extracted(ReasonerTestUtils.EXAMPLE2)
        _, _, second = extracted(ReasonerTestUtils.EXAMPLE2)
        assert first == second

    def test_root_path_ends_in_state(self):
        kb, result, _ = extracted(ReasonerTestUtils.EXAMPLE2)
        graph = result.graph
        path = saturation_path(graph, graph.root)
        assert path[0] == graph.root
        assert graph.node(path[-1]).is_complex_state
        assert all(graph.node(v).status.kind.value != "closed" for v in path)

    def test_blocked_then_closed_wrt_node_ends_path(self):
        # 被阻塞后又变为 closed-wrt(U) 的节点，对 U 之外的复合状态仍是终点
        kb, result, _ = extracted(ReasonerTestUtils.EXAMPLE2)
        graph = result.graph
        blocked = [node for node in graph.nodes.values()
                   if node.blocked and node.status.kind is StatusKind.CLOSED_WRT]
        assert blocked
        states = [v for v, node in graph.nodes.items() if node.is_complex_state]
        for node in blocked:
            outside = [u for u in states if u not in node.status.wrt]
            assert outside
            for u in outside:
                assert saturation_path(graph, node.id, wrt=u) == [node.id]
                with pytest.raises(ExtractionError):
                    saturation_path(graph, node.id, wrt=u, avoid_blocked=True)
            for u in node.status.wrt:
                with pytest.raises(ExtractionError):
                    saturation_path(graph, node.id, wrt=u)

    def test_merged_individual_shares_element(self):
        kb = ReasonerTestUtils.kb("""
            abox a : one b
            abox a : A
        """)
        result = ReasonerTestUtils.run(kb)
        m = extract_model(result.graph, kb)
        assert m.individuals["a"] == m.individuals["b"]
        assert check_model(corresponding_model(m, kb.rbox), kb)

    def test_closed_root_rejected(self):
        kb = ReasonerTestUtils.load(ReasonerTestUtils.EXAMPLE1)
        result = ReasonerTestUtils.run(kb)
        with pytest.raises(ExtractionError):
            extract_model(result.graph, kb)


class TestModelGraphConditions:

    def kb(self):
        return ReasonerTestUtils.kb("""
            abox a : A
            abox b : B
            abox r(a, b)
        """)

    def graph(self, concepts):
        m = ModelGraph(delta=["a", "b"], individuals={"a": "a", "b": "b"},
                       concepts={"a": set(concepts), "b": {B}})
        m.add_edge("r", "a", "b")
        return m

    def numbers(self, problems):
        return {p.split(")", 1)[0] + ")" for p in problems}

    def test_consistent(self):
        assert check_model_graph(self.graph({A}), self.kb()) == []

    def test_clash(self):
        assert self.numbers(check_model_graph(self.graph({A, NegAtomic("A")}), self.kb())) == {"(1)"}
        assert self.numbers(check_model_graph(self.graph({BOT}), self.kb())) == {"(1)"}

    def test_nominal(self):
        assert self.numbers(check_model_graph(self.graph({Nominal("b")}), self.kb())) == {"(3)"}

    def test_boolean(self):
        assert self.numbers(check_model_graph(self.graph({And(A, B)}), self.kb())) == {"(4)"}
        assert self.numbers(check_model_graph(self.graph({Or(A, B)}), self.kb())) == {"(5)"}

    def test_counting(self):
        assert self.numbers(check_model_graph(self.graph({Exists("r", A)}), self.kb())) == {"(9)"}
        problems = check_model_graph(self.graph({AtMost(0, "r", B)}), self.kb())
        assert self.numbers(problems) == {"(11)"}
        problems = check_model_graph(self.graph({AtMost(1, "r", A)}), self.kb())
        assert self.numbers(problems) == {"(12)"}

    def test_subrole_edges(self):
        kb = ReasonerTestUtils.kb("""
            rbox r sub s
            abox r(a, b)
        """)
        m = ModelGraph(delta=["a", "b"], individuals={"a": "a", "b": "b"}, concepts={"a": set(), "b": set()})
        m.add_edge("r", "a", "b")
        assert self.numbers(check_model_graph(m, kb)) == {"(2)"}


class TestCorrespondingModel:

    def test_closure_over_hierarchy_and_transitivity(self):
        rbox = build_rbox_closure([RBoxAxiom("sub", "s", "r"), RBoxAxiom("trans", "r")], ["r", "s"])
        m = ModelGraph(delta=["x", "y", "z", "w"], individuals={"a": "x"},
                       concepts={"x": {A}, "y": set(), "z": set(), "w": {A}})
        m.add_edge("r", "x", "y")
        m.add_edge("r", "y", "z")
        m.add_edge("s", "z", "w")
        model = corresponding_model(m, rbox)
        assert model.role("s") == {("z", "w")}
        assert ("x", "w") in model.role("r")
        assert ("y", "w") in model.role("r")
        assert model.extension("A") == {"x", "w"}
