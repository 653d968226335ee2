#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
表格图数据模型测试：全局缓存、层次约束、状态不变式与可达性
"""

import pytest

from logic_core import Atomic, Exists, Instance, Nominal, RoleAssertion, TableauDefectError
from tableau_graph import (
    BLOCKED, CLOSED, F_EXPANDED, OPEN, P_EXPANDED, EdgeLabel, EdgeType, NodeType,
    StatusKind, SubType, TableauGraph, closed_wrt, full_label, init_tableau,
)
from test_utils import ReasonerTestUtils

A, B = Atomic("A"), Atomic("B")
TC = EdgeLabel(EdgeType.TESTING_CLOSEDNESS, frozenset({"r"}), "a")


def small_graph():
    """根 v0 -> 复合状态 v1 -tc-> 简单非状态 v2"""
    graph = TableauGraph()
    root, _ = graph.con_to_succ(None, NodeType.NON_STATE, SubType.COMPLEX, {Instance("a", A)}, ())
    graph.root = root
    state, _ = graph.con_to_succ(root, NodeType.STATE, SubType.COMPLEX, {Instance("a", A)}, ())
    simple, _ = graph.con_to_succ(state, NodeType.NON_STATE, SubType.SIMPLE, {B}, (), None, TC)
    return graph, root, state, simple


class TestInit:

    def test_root_label_contains_abox_and_tbox_instances(self):
        kb = ReasonerTestUtils.kb("""
            tbox A sub B
            abox a : A
            abox r(a, b)
        """)
        graph = init_tableau(kb)
        root = graph.node(graph.root)
        assert root.is_complex and not root.is_state
        assert root.status.kind is StatusKind.UNEXPANDED
        for f in kb.abox:
            assert f in root.label
        for c in kb.tbox:
            assert Instance("a", c) in root.label
            assert Instance("b", c) in root.label
        assert root.ind_repl == {"a": "a", "b": "b"}
        assert graph.check_invariants() == []


class TestGlobalCaching:

    def test_same_label_reuses_node(self):
        graph, root, state, simple = small_graph()
        other = EdgeLabel(EdgeType.CHECKING_FEASIBILITY, frozenset({"r"}), None)
        w, created = graph.con_to_succ(state, NodeType.NON_STATE, SubType.SIMPLE, {B}, (), None, other)
        assert w == simple and not created
        assert graph.elabels(state, simple) == sorted([TC, other], key=EdgeLabel.sort_key)
        assert len(graph.nodes) == 3

    def test_simple_nodes_cached_across_types(self):
        graph, root, state, simple = small_graph()
        w, created = graph.con_to_succ(state, NodeType.STATE, SubType.SIMPLE, {B}, (), None, TC)
        assert w == simple and not created

    def test_complex_nodes_distinguished_by_type(self):
        graph, root, state, simple = small_graph()
        assert state != root
        assert graph.node(state).label == graph.node(root).label

    def test_reuse_merges_rfmls(self):
        graph, root, state, simple = small_graph()
        extra = Instance("a", Exists("r", A))
        w, _ = graph.con_to_succ(root, NodeType.STATE, SubType.COMPLEX, {Instance("a", A)}, {extra})
        assert w == state
        assert extra in graph.node(state).rfmls
        assert extra in full_label(graph.node(state))


class TestLayers:

    def test_simple_to_complex_rejected(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            graph.con_to_succ(simple, NodeType.NON_STATE, SubType.COMPLEX, {Instance("a", B)}, ())

    def test_complex_non_state_to_simple_rejected(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            graph.con_to_succ(root, NodeType.NON_STATE, SubType.SIMPLE, {A}, ())

    def test_label_kinds(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            graph.con_to_succ(state, NodeType.NON_STATE, SubType.SIMPLE, {Instance("a", A)}, (), None, TC)
        with pytest.raises(TableauDefectError):
            graph.con_to_succ(root, NodeType.NON_STATE, SubType.COMPLEX, {RoleAssertion("r", "a", "b"), A}, ())

    def test_state_edges_need_labels(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            graph.con_to_succ(state, NodeType.NON_STATE, SubType.SIMPLE, {A}, ())
        with pytest.raises(TableauDefectError):
            graph.add_edge(root, state, TC)


class TestStatuses:

    def test_final_status_is_permanent(self):
        graph, root, state, simple = small_graph()
        assert graph.set_status(simple, CLOSED)
        assert not graph.set_status(simple, CLOSED)
        with pytest.raises(TableauDefectError):
            graph.set_status(simple, OPEN)

    def test_p_expanded_only_for_states(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            graph.set_status(simple, P_EXPANDED)
        assert graph.set_status(state, P_EXPANDED)

    def test_blocked_needs_nominal(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            graph.set_status(simple, BLOCKED)
        w, _ = graph.con_to_succ(state, NodeType.NON_STATE, SubType.SIMPLE, {Nominal("a"), B}, (), None, TC)
        assert graph.set_status(w, BLOCKED)
        with pytest.raises(TableauDefectError):
            graph.set_status(w, F_EXPANDED)
        assert graph.set_status(w, closed_wrt({state}))

    def test_closed_wrt_set(self):
        graph, root, state, simple = small_graph()
        with pytest.raises(TableauDefectError):
            closed_wrt(())
        with pytest.raises(TableauDefectError):
            graph.set_status(simple, closed_wrt({root}))
        assert graph.set_closed_wrt(simple, state)
        assert not graph.set_closed_wrt(simple, state)
        assert graph.node(simple).status.is_closed_wrt(state)
        assert str(graph.node(simple).status) == "closed-wrt({v1})"

    def test_status_log_checked(self):
        graph, root, state, simple = small_graph()
        graph.set_status(simple, F_EXPANDED)
        graph.set_status(simple, OPEN)
        assert graph.check_invariants() == []
        graph.status_log.append((simple, OPEN, CLOSED))
        assert any("最终状态" in p for p in graph.check_invariants())


class TestReachability:

    def test_may_affect_root(self):
        graph, root, state, simple = small_graph()
        assert graph.may_affect_root(simple)
        assert graph.may_affect_root(simple, through=state)
        assert graph.complex_states_through(simple) == [state]

    def test_final_node_blocks_paths(self):
        graph, root, state, simple = small_graph()
        graph.set_status(state, P_EXPANDED)
        graph.set_status(state, F_EXPANDED)
        graph.set_status(state, OPEN)
        assert graph.may_affect_root(state)
        assert not graph.may_affect_root(simple)

    def test_closed_wrt_blocks_paths_through_its_state(self):
        graph, root, state, simple = small_graph()
        w, _ = graph.con_to_succ(simple, NodeType.NON_STATE, SubType.SIMPLE, {A, B}, ())
        graph.set_closed_wrt(simple, state)
        assert not graph.may_affect_root(w)
        assert graph.may_affect_root(simple)
