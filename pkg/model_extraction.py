#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
模型抽取模块
从根未关闭的表格图中沿饱和路径构造模型图 ⟨Δ, I, C, E⟩，
检查其一致性与 R-饱和条件，并导出对应的 R-模型
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, Hashable, List, Optional, Set, Tuple

import networkx as nx

from ilp_feasibility import DEFAULT_NODE_BUDGET, IfdlConstraint, check_feasibility
from kb_parser import KnowledgeBase
from logic_core import (
    And, AtLeast, AtMost, Atomic, Bot, Concept, Exists, ExtractionError, Forall,
    Individual, Instance, Nominal, NegNominal, Or, RBoxClosure, Role,
    RoleAssertion, concept_key, negate_nnf, show_concept, substitute_concept,
)
from semantics import Element, Interpretation, sorted_elements
from tableau_graph import EdgeLabel, EdgeType, StatusKind, TableauGraph

logger = logging.getLogger(__name__)


@dataclass
class ModelGraph:
    """
    模型图

    Attributes:
        delta: 元素（命名个体在前，匿名元素 _k 按创建顺序）
        individuals: nI，个体到元素
        concepts: nC，元素到概念集合
        edges: nE，角色到元素对集合
        origin: f，匿名元素对应的简单状态
    """
    delta: List[Element] = field(default_factory=list)
    individuals: Dict[Individual, Element] = field(default_factory=dict)
    concepts: Dict[Element, Set[Concept]] = field(default_factory=dict)
    edges: Dict[Role, Set[Tuple[Element, Element]]] = field(default_factory=dict)
    origin: Dict[Element, int] = field(default_factory=dict)

    def add_edge(self, r: Role, x: Element, y: Element) -> None:
        self.edges.setdefault(r, set()).add((x, y))

    def successors(self, r: Role, x: Element) -> List[Element]:
        return sorted_elements(y for (s, y) in self.edges.get(r, ()) if s == x)


# ---------------------------------------------------------------------------
# 饱和路径
# ---------------------------------------------------------------------------

def saturation_path(graph: TableauGraph, v: int, wrt: Optional[int] = None,
                    avoid_blocked: bool = False) -> List[int]:
    """
    求节点 v 的饱和路径

    wrt 为空时路径终止于状态，且路径上的节点都不是 closed；
    终点 u 还要求路径上没有 closed-wrt({u,…})。
    wrt 为复合状态 u 时路径终止于状态或被 DN 阻塞过的节点，
    路径上不出现 closed 与 closed-wrt({u,…})；被阻塞节点之后
    可能变为 closed-wrt(U)，只要 u ∉ U 就仍可作为终点。
    优先走 open 的后继，其余按编号从小到大；进入 open 节点后只走 open 后继。

    Args:
        graph: 表格图
        v: 起点
        wrt: 相对的复合状态
        avoid_blocked: 是否排除终止于 blocked 的路径

    Returns:
        List[int]: v0 = v, …, vk

    Raises:
        ExtractionError: 不存在满足条件的路径
    """

    def usable(x: int) -> bool:
        status = graph.node(x).status
        if status.kind is StatusKind.CLOSED:
            return False
        return wrt is None or not status.is_closed_wrt(wrt)

    def accept(path: List[int]) -> bool:
        end = graph.node(path[-1])
        if end.is_state:
            if wrt is None:
                return not any(graph.node(x).status.is_closed_wrt(end.id) for x in path)
            return True
        return (wrt is not None and end.blocked
                and not avoid_blocked)

    failed: Set[int] = set()

    def search(path: List[int]) -> Optional[List[int]]:
        x = path[-1]
        node = graph.node(x)
        if node.is_state or (wrt is not None and node.blocked):
            return list(path) if accept(path) else None
        if x in failed:
            return None
        open_only = node.status.kind is StatusKind.OPEN
        candidates = [w for w in graph.successors(x) if usable(w) and w not in path]
        if open_only:
            candidates = [w for w in candidates if graph.node(w).status.kind is StatusKind.OPEN]
        candidates.sort(key=lambda w: (graph.node(w).status.kind is not StatusKind.OPEN, w))
        for w in candidates:
            found = search(path + [w])
            if found is not None:
                return found
        # 根路径的可接受性依赖终点，不能记忆
        if wrt is not None:
            failed.add(x)
        return None

    if not usable(v):
        raise ExtractionError(f"v{v} 的状态为 {graph.node(v).status}，没有饱和路径")
    path = search([v])
    if path is None:
        target = "" if wrt is None else f" (相对 v{wrt})"
        raise ExtractionError(f"v{v} 没有饱和路径{target}")
    return path


# ---------------------------------------------------------------------------
# 模型图构造
# ---------------------------------------------------------------------------

class ModelExtractor:
    """按完备性证明的构造过程逐个解析模型图元素"""

    def __init__(self, graph: TableauGraph, kb: KnowledgeBase, node_budget: int = DEFAULT_NODE_BUDGET):
        self.graph = graph
        self.kb = kb
        self.node_budget = node_budget
        self.model = ModelGraph()
        self.u: Optional[int] = None
        self.repl: Dict[Individual, Individual] = {}
        self._solutions: Dict[int, Dict[Hashable, int]] = {}
        self._fresh: Dict[tuple, Element] = {}
        self._queue: Deque[Element] = deque()
        self._base: Set[Element] = set()

    def run(self) -> ModelGraph:
        graph = self.graph
        root = graph.node(graph.root)
        if root.status.kind is StatusKind.CLOSED:
            raise ExtractionError("根节点已关闭，无法抽取模型")
        path = saturation_path(graph, graph.root)
        self.u = path[-1]
        logger.debug(f"根的饱和路径: {' -> '.join(f'v{x}' for x in path)}")
        self._init_base()
        while self._queue:
            self._resolve(self._queue.popleft())
        m = self.model
        logger.info(f"模型抽取完成: {len(m.delta)} 个元素 (命名 {len(self._base)}), "
                    f"{sum(len(p) for p in m.edges.values())} 条边")
        return m

    def _substitute(self, c: Concept) -> Concept:
        return substitute_concept(c, self.repl)

    def _init_base(self) -> None:
        u = self.graph.node(self.u)
        self.repl = dict(u.ind_repl or {})
        base = [a for a in self.kb.individuals if self.repl.get(a) == a]
        if not base:
            raise ExtractionError(f"复合状态 v{self.u} 没有保持不变的个体")
        m = self.model
        for a in base:
            m.delta.append(a)
            m.concepts[a] = set()
            self._base.add(a)
            self._queue.append(a)
        for a in self.kb.individuals:
            m.individuals[a] = self.repl.get(a, base[0])
        for f in self.graph.full_label(self.u):
            if isinstance(f, Instance):
                if f.individual not in self._base:
                    raise ExtractionError(f"v{self.u} 的标签含有已合并个体的断言: {f}")
                m.concepts[f.individual].add(f.concept)
            elif isinstance(f, RoleAssertion):
                m.add_edge(f.role, f.source, f.target)

    def _solution(self, v: int) -> Dict[Hashable, int]:
        """固定状态 v 的一组整数解：closed 与 closed-wrt({u,…}) 的后继取 0"""
        found = self._solutions.get(v)
        if found is not None:
            return found
        graph = self.graph
        open_mode = graph.node(v).status.kind is StatusKind.OPEN
        zeros = []
        for w, e in graph.il_variables(v):
            status = graph.node(w).status
            if (status.kind is StatusKind.CLOSED or status.is_closed_wrt(self.u)
                    or (open_mode and status.kind is not StatusKind.OPEN)):
                zeros.append(IfdlConstraint.zero((w, e)))
        result = check_feasibility(graph.il_problem(v, zeros), self.node_budget)
        if not result.feasible:
            raise ExtractionError(f"v{v} 的整数线性约束不可行 (相对 v{self.u})")
        self._solutions[v] = result.witness
        return result.witness

    def _pairs(self, y: Element) -> Tuple[int, List[Tuple[int, EdgeLabel]]]:
        graph = self.graph
        if y in self._base:
            v = self.u
            pairs = [(w, e) for w in graph.successors(v) for e in graph.elabels(v, w) if e.pi_i == y]
        else:
            v = self.model.origin[y]
            pairs = [(w, e) for w in graph.successors(v) for e in graph.elabels(v, w)]
        return v, pairs

    def _resolve(self, y: Element) -> None:
        graph = self.graph
        m = self.model
        v, pairs = self._pairs(y)
        solution = self._solution(v)
        for w0, e in pairs:
            if e.pi_t is EdgeType.TESTING_CLOSEDNESS:
                n = 1
            else:
                n = solution.get((w0, e), 0)
            if n == 0:
                continue
            wh = self._path(w0, e, n)[-1]
            content = {self._substitute(c) for c in graph.full_label(wh) if isinstance(c, Concept)}
            if graph.node(wh).blocked:
                a = self._redirect_target(wh, content)
                for r in sorted(e.pi_r):
                    m.add_edge(r, y, a)
                m.concepts[a] |= content
                continue
            for i in range(n):
                z = self._fresh_element((wh, w0, e, i), wh, content)
                for r in sorted(e.pi_r):
                    m.add_edge(r, y, z)

    def _path(self, w0: int, e: EdgeLabel, n: int) -> List[int]:
        """重数大于 1 时终点不能是 blocked 节点"""
        if n == 1:
            return saturation_path(self.graph, w0, self.u)
        try:
            return saturation_path(self.graph, w0, self.u, avoid_blocked=True)
        except ExtractionError:
            saturation_path(self.graph, w0, self.u)
            raise ExtractionError(f"x[v{w0},{e}] = {n}，但从 v{w0} 出发只能到达 blocked 节点")

    def _redirect_target(self, wh: int, content: Set[Concept]) -> Element:
        nominals = sorted(c.individual for c in content if isinstance(c, Nominal))
        if not nominals or nominals[0] not in self._base:
            raise ExtractionError(f"blocked 节点 v{wh} 没有指向基本个体的名词")
        return nominals[0]

    def _fresh_element(self, key: tuple, wh: int, content: Set[Concept]) -> Element:
        z = self._fresh.get(key)
        if z is not None:
            return z
        z = f"_{len(self._fresh) + 1}"
        self._fresh[key] = z
        m = self.model
        m.delta.append(z)
        m.concepts[z] = set(content)
        m.origin[z] = wh
        self._queue.append(z)
        return z


def extract_model(graph: TableauGraph, kb: KnowledgeBase, node_budget: int = DEFAULT_NODE_BUDGET) -> ModelGraph:
    """
    从根未关闭的表格图构造模型图

    匿名元素按 (终点状态, 起点, 边标签, 序号) 记忆，结果有限（不一定是树）。

    Raises:
        ExtractionError: 根已关闭、饱和路径不存在或重数不合法
    """
    return ModelExtractor(graph, kb, node_budget).run()


# ---------------------------------------------------------------------------
# 一致性与 R-饱和条件
# ---------------------------------------------------------------------------

def _count(m: ModelGraph, r: Role, x: Element, c: Concept) -> int:
    return sum(1 for y in m.successors(r, x) if c in m.concepts.get(y, ()))


def check_model_graph(m: ModelGraph, kb: KnowledgeBase) -> List[str]:
    """
    检查模型图的一致性与 R-饱和条件

    返回全部违反项，每项以条件编号开头：
    (1) 无 ⊥ 且无互补对  (2) 子角色边闭包  (3) {a} ∈ C(x) ⇒ I(a) = x
    (4) ⊓  (5) ⊔  (6) ∀ 下推到子角色  (7) ∀ 沿边传播  (8) 传递角色的 ∀
    (9) ∃  (10) ≥  (11) ≤  (12) ≤ 的选择  (13) ¬{a} ∈ C(x) ⇒ I(a) ≠ x
    """
    rbox = kb.rbox
    problems: List[str] = []
    delta = set(m.delta)
    if not delta:
        problems.append("(0) 论域为空")
    for a in kb.individuals:
        if m.individuals.get(a) not in delta:
            problems.append(f"(0) 个体 {a} 未映射到论域")
    for r, pairs in sorted(m.edges.items()):
        for x, y in sorted(pairs):
            if x not in delta or y not in delta:
                problems.append(f"(0) 边 {r}({x},{y}) 越出论域")
            for s in sorted(rbox.supers(r) - {r}):
                if (x, y) not in m.edges.get(s, ()):
                    problems.append(f"(2) {r}({x},{y}) 存在但缺少 {s}({x},{y})")

    for x in m.delta:
        label = m.concepts.get(x, set())
        for c in sorted(label, key=concept_key):
            problems.extend(f"({number}) {x}: {text}" for number, text in _element_problems(m, kb, x, c, label))
    return problems


def _element_problems(m: ModelGraph, kb: KnowledgeBase, x: Element, c: Concept, label: Set[Concept]):
    rbox = kb.rbox
    shown = show_concept(c)
    if isinstance(c, Bot):
        yield 1, "含有 ⊥"
    else:
        complement = negate_nnf(c)
        if complement in label and concept_key(c) < concept_key(complement):
            yield 1, f"同时含有 {shown} 与 {show_concept(complement)}"
    if isinstance(c, Nominal) and m.individuals.get(c.individual) != x:
        yield 3, f"含有 {shown} 但 I({c.individual}) = {m.individuals.get(c.individual)}"
    elif isinstance(c, NegNominal) and m.individuals.get(c.individual) == x:
        yield 13, f"含有 {shown} 但 I({c.individual}) = {x}"
    elif isinstance(c, And):
        if c.left not in label or c.right not in label:
            yield 4, f"{shown} 的合取项不全"
    elif isinstance(c, Or):
        if c.left not in label and c.right not in label:
            yield 5, f"{shown} 的析取项都不在"
    elif isinstance(c, Forall):
        for r in sorted(rbox.subroles(c.role)):
            if Forall(r, c.filler) not in label:
                yield 6, f"含有 {shown} 但缺少 ∀{r}.{show_concept(c.filler)}"
        for y in m.successors(c.role, x):
            target = m.concepts.get(y, set())
            if c.filler not in target:
                yield 7, f"{shown} 未传播到 {y}"
            if rbox.is_transitive(c.role) and c not in target:
                yield 8, f"传递角色上的 {shown} 未传播到 {y}"
    elif isinstance(c, Exists):
        if _count(m, c.role, x, c.filler) < 1:
            yield 9, f"{shown} 没有见证"
    elif isinstance(c, AtLeast):
        have = _count(m, c.role, x, c.filler)
        if have < c.n:
            yield 10, f"{shown} 只有 {have} 个见证"
    elif isinstance(c, AtMost):
        have = _count(m, c.role, x, c.filler)
        if have > c.n:
            yield 11, f"{shown} 有 {have} 个后继"
        complement = negate_nnf(c.filler)
        for y in m.successors(c.role, x):
            target = m.concepts.get(y, set())
            if c.filler not in target and complement not in target:
                yield 12, f"{shown}: {y} 既不含 {show_concept(c.filler)} 也不含其否定"


# ---------------------------------------------------------------------------
# 对应的 R-模型
# ---------------------------------------------------------------------------

def corresponding_model(m: ModelGraph, rbox: RBoxClosure) -> Interpretation:
    """
    模型图对应的 R-模型

    E′ 为包含 nE、对子角色封闭、对传递角色做传递闭包的最小关系。
    """
    roles = set(rbox.roles) | set(m.edges)
    extended: Dict[Role, Set[Tuple[Element, Element]]] = {r: set(m.edges.get(r, ())) for r in roles}
    changed = True
    while changed:
        changed = False
        for r in sorted(roles):
            for s in sorted(rbox.supers(r)):
                if s in extended and not extended[r] <= extended[s]:
                    extended[s] |= extended[r]
                    changed = True
            if rbox.is_transitive(r) and extended[r]:
                closure = set(nx.transitive_closure(nx.DiGraph(list(extended[r])), reflexive=False).edges())
                if not closure <= extended[r]:
                    extended[r] |= closure
                    changed = True
    names = sorted({c.name for label in m.concepts.values() for c in label if isinstance(c, Atomic)})
    concept_names = {
        name: frozenset(x for x in m.delta if Atomic(name) in m.concepts.get(x, ()))
        for name in names
    }
    roles_ext = {r: frozenset(pairs) for r, pairs in extended.items()}
    return Interpretation(tuple(m.delta), concept_names, roles_ext, dict(m.individuals))
