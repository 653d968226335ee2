#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
测试工具模块
提供示例知识库、随机知识库与随机整数规划问题的生成，
以及推理结束后的表格图结构检查
"""

import os
import random
import sys
from typing import List, Optional

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from ilp_feasibility import IfdlConstraint, IfdlProblem, Sense
from kb_parser import KnowledgeBase, RBoxAxiom, TBoxAxiom, build_rbox_closure, load_kb, make_kb, parse_kb
from logic_core import (
    TOP, And, AtLeast, AtMost, Atomic, Concept, Exists, Forall, Formula, Instance,
    NegAtomic, NegNominal, Nominal, NotEq, Or, RoleAssertion, closure, negate_nnf,
)
from tableau_graph import TableauGraph
from tableau_rules import ReasoningResult, check_satisfiability

KB_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "examples_kb")


class ReasonerTestUtils:
    """推理器测试工具类"""

    EXAMPLE1 = "example1.kb"
    EXAMPLE2 = "example2.kb"
    CORPUS = {
        "example1.kb": False,
        "example2.kb": True,
        "cyclic_tbox.kb": True,
        "role_hierarchy.kb": False,
        "nominal_merge.kb": False,
        "counting.kb": False,
        "nominal_successor.kb": True,
    }

    # ------------------------------------------------------------------
    # 知识库
    # ------------------------------------------------------------------

    @staticmethod
    def kb_path(name: str) -> str:
        return os.path.join(KB_DIR, name)

    @classmethod
    def kb_text(cls, name: str) -> str:
        with open(cls.kb_path(name), "r", encoding="utf-8") as f:
            return f.read()

    @classmethod
    def load(cls, name: str) -> KnowledgeBase:
        return load_kb(cls.kb_path(name))

    @staticmethod
    def kb(text: str) -> KnowledgeBase:
        """由知识库文本构造（自动补全段落内的缩进与空行）"""
        lines = [line.strip() for line in text.strip().splitlines()]
        return parse_kb("\n".join(lines) + "\n")

    @classmethod
    def run(cls, kb: KnowledgeBase, **options) -> ReasoningResult:
        """运行推理，默认打开跟踪与不变式检查"""
        options.setdefault("trace", True)
        options.setdefault("check_invariants", True)
        return check_satisfiability(kb, **options)

    # ------------------------------------------------------------------
    # 结构检查
    # ------------------------------------------------------------------

    @staticmethod
    def has_merges(graph: TableauGraph) -> bool:
        """是否有节点发生了个体合并"""
        for node in graph.nodes.values():
            if node.ind_repl and any(a != b for a, b in node.ind_repl.items()):
                return True
        return False

    @classmethod
    def structural_problems(cls, graph: TableauGraph, kb: KnowledgeBase) -> List[str]:
        """
        全局缓存唯一性、层次约束、状态单调性，以及标签 ⊆ closure(kb)

        发生个体合并时替换后的概念可能不在闭包中，此时跳过闭包检查。
        """
        problems = list(graph.check_invariants())
        if cls.has_merges(graph):
            return problems
        gamma = closure(kb)
        for node in graph.nodes.values():
            for f in node.label:
                if f not in gamma:
                    problems.append(f"{node.name} 的标签公式 {f} 不在闭包中")
        return problems

    @staticmethod
    def trace_contains(trace: List[str], *fragments: str) -> bool:
        """某一行同时包含全部片段"""
        return any(all(fragment in line for fragment in fragments) for line in trace)

    @staticmethod
    def status_history(graph: TableauGraph, v: int) -> List[str]:
        """节点 v 依次取得的状态"""
        return [str(new) for node, _, new in graph.status_log if node == v]

    # ------------------------------------------------------------------
    # 随机生成
    # ------------------------------------------------------------------

    @staticmethod
    def random_problem(rng: random.Random, max_vars: int = 6, max_constraints: int = 5,
                       max_bound: int = 5) -> IfdlProblem:
        """随机 IFDL 问题：每个约束是随机变量子集上的 ≥ 或 ≤"""
        n = rng.randint(1, max_vars)
        variables = tuple(f"x{i}" for i in range(1, n + 1))
        constraints = []
        for _ in range(rng.randint(1, max_constraints)):
            size = rng.randint(1, n)
            chosen = tuple(sorted(rng.sample(variables, size), key=variables.index))
            roll = rng.random()
            if roll < 0.1:
                constraints.append(IfdlConstraint.zero(chosen[0]))
            else:
                sense = Sense.GE if roll < 0.55 else Sense.LE
                constraints.append(IfdlConstraint(chosen, rng.randint(0, max_bound), sense))
        return IfdlProblem(variables, tuple(constraints))

    @classmethod
    def random_kb(cls, rng: random.Random, nominal_probability: float = 0.3) -> KnowledgeBase:
        """
        随机小知识库：≤2 个个体、≤2 个角色、≤2 个概念名、数 ≤3，
        可选一条传递公理与一条子角色公理
        """
        individuals = ["a", "b"][:rng.randint(1, 2)]
        roles = ["r", "s"][:rng.randint(1, 2)]
        names = ["A", "B"][:rng.randint(1, 2)]

        rbox_axioms: List[RBoxAxiom] = []
        if len(roles) == 2 and rng.random() < 0.3:
            rbox_axioms.append(RBoxAxiom("sub", roles[1], roles[0]))
        if rng.random() < 0.3:
            rbox_axioms.append(RBoxAxiom("trans", rng.choice(roles)))
        rbox = build_rbox_closure(rbox_axioms, roles)
        simple = [r for r in roles if rbox.is_simple(r)]

        def concept(depth: int) -> Concept:
            if depth == 0 or rng.random() < 0.3:
                if rng.random() < nominal_probability:
                    a = rng.choice(individuals)
                    return Nominal(a) if rng.random() < 0.7 else NegNominal(a)
                roll = rng.random()
                if roll < 0.1:
                    return TOP
                name = rng.choice(names)
                return Atomic(name) if roll < 0.6 else NegAtomic(name)
            kind = rng.choice(["and", "or", "some", "only", "atleast", "atmost"])
            if kind in ("and", "or"):
                left, right = concept(depth - 1), concept(depth - 1)
                return And(left, right) if kind == "and" else Or(left, right)
            if kind in ("some", "only") or not simple:
                role = rng.choice(roles)
                filler = concept(depth - 1)
                return Exists(role, filler) if kind != "only" else Forall(role, filler)
            role = rng.choice(simple)
            n = rng.randint(0, 3)
            filler = concept(depth - 1)
            return AtLeast(n, role, filler) if kind == "atleast" else AtMost(n, role, filler)

        abox: List[Formula] = []
        for _ in range(rng.randint(1, 3)):
            abox.append(Instance(rng.choice(individuals), concept(2)))
        if rng.random() < 0.4:
            abox.append(RoleAssertion(rng.choice(roles), rng.choice(individuals), rng.choice(individuals)))
        if len(individuals) == 2 and rng.random() < 0.2:
            abox.append(NotEq("a", "b"))
        tbox_axioms: List[TBoxAxiom] = []
        if rng.random() < 0.3:
            tbox_axioms.append(TBoxAxiom("sub", Atomic(rng.choice(names)), concept(1)))
        return make_kb(rbox_axioms, tbox_axioms, abox, individuals, roles)

    @staticmethod
    def negated(c: Concept) -> Concept:
        return negate_nnf(c)


def example_kb(name: str) -> Optional[KnowledgeBase]:
    """示例知识库（文件不存在时返回 None）"""
    path = ReasonerTestUtils.kb_path(name)
    return load_kb(path) if os.path.exists(path) else None
