#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
表格图模块
带根的与或表格图：节点与边标签的数据模型、全局缓存、ConToSucc、
FullLabel、状态存储以及“可能影响根状态”的可达性分析
"""

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from ilp_feasibility import IfdlConstraint, IfdlProblem
from logic_core import (
    Assertion, Concept, Formula, Individual, Instance, INTERNAL_FORMS,
    Nominal, Role, TableauDefectError, formula_concept, label_individuals,
    show_label,
)

logger = logging.getLogger(__name__)


class NodeType(Enum):
    STATE = "state"
    NON_STATE = "non-state"


class SubType(Enum):
    COMPLEX = "complex"
    SIMPLE = "simple"


class StatusKind(Enum):
    UNEXPANDED = "unexpanded"
    P_EXPANDED = "p-expanded"
    F_EXPANDED = "f-expanded"
    CLOSED = "closed"
    OPEN = "open"
    BLOCKED = "blocked"
    CLOSED_WRT = "closed-wrt"


@dataclass(frozen=True)
class NodeStatus:
    """节点状态；closed-wrt 带非空的复合状态集合 U"""
    kind: StatusKind
    wrt: FrozenSet[int] = frozenset()

    def __str__(self) -> str:
        if self.kind is StatusKind.CLOSED_WRT:
            return "closed-wrt({" + ",".join(f"v{u}" for u in sorted(self.wrt)) + "})"
        return self.kind.value

    @property
    def final(self) -> bool:
        """closed 与 open 不再改变"""
        return self.kind in (StatusKind.CLOSED, StatusKind.OPEN)

    def is_closed_wrt(self, u: int) -> bool:
        return self.kind is StatusKind.CLOSED_WRT and u in self.wrt


UNEXPANDED = NodeStatus(StatusKind.UNEXPANDED)
P_EXPANDED = NodeStatus(StatusKind.P_EXPANDED)
F_EXPANDED = NodeStatus(StatusKind.F_EXPANDED)
CLOSED = NodeStatus(StatusKind.CLOSED)
OPEN = NodeStatus(StatusKind.OPEN)
BLOCKED = NodeStatus(StatusKind.BLOCKED)


def closed_wrt(nodes: Iterable[int]) -> NodeStatus:
    nodes = frozenset(nodes)
    if not nodes:
        raise TableauDefectError("closed-wrt 的集合不能为空")
    return NodeStatus(StatusKind.CLOSED_WRT, nodes)


class EdgeType(Enum):
    TESTING_CLOSEDNESS = "testingClosedness"
    CHECKING_FEASIBILITY = "checkingFeasibility"


@dataclass(frozen=True)
class EdgeLabel:
    """状态出边的标签 (π_T, π_R, π_I)"""
    pi_t: EdgeType
    pi_r: FrozenSet[Role]
    pi_i: Optional[Individual]

    def sort_key(self) -> tuple:
        return (self.pi_t.value, tuple(sorted(self.pi_r)), self.pi_i or "")

    def __str__(self) -> str:
        kind = "tc" if self.pi_t is EdgeType.TESTING_CLOSEDNESS else "cf"
        roles = ",".join(sorted(self.pi_r))
        return f"{kind}/{{{roles}}}/{self.pi_i or 'null'}"


# 整数规划变量 x_{w,e}
IlVar = Tuple[int, EdgeLabel]


def il_var_key(var: IlVar) -> tuple:
    return (var[0],) + var[1].sort_key()


def show_il_var(var: IlVar) -> str:
    return f"x[v{var[0]},{var[1]}]"


@dataclass
class TableauNode:
    """
    表格图节点

    Attributes:
        id: 稳定的整数编号（根为 0）
        type / stype: state 或 non-state；complex 或 simple
        status: 当前状态
        label / rfmls: 标签与已约化公式
        ind_repl: 个体替换映射（仅复合节点）
        il_constraints: 整数线性约束（仅状态）
        blocked: 是否曾被规则 DN 阻塞
    """
    id: int
    type: NodeType
    stype: SubType
    status: NodeStatus
    label: FrozenSet[Formula]
    rfmls: FrozenSet[Formula]
    ind_repl: Optional[Dict[Individual, Individual]] = None
    il_constraints: Optional[List[IfdlConstraint]] = None
    blocked: bool = False
    _full_label: Optional[FrozenSet[Formula]] = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return f"v{self.id}"

    @property
    def is_state(self) -> bool:
        return self.type is NodeType.STATE

    @property
    def is_complex(self) -> bool:
        return self.stype is SubType.COMPLEX

    @property
    def is_simple(self) -> bool:
        return self.stype is SubType.SIMPLE

    @property
    def is_complex_state(self) -> bool:
        return self.is_state and self.is_complex

    def has_nominal(self) -> bool:
        return any(isinstance(f, Nominal) for f in self.label)

    def nominals(self) -> List[Individual]:
        return sorted(f.individual for f in self.label if isinstance(f, Nominal))


def is_internal_formula(f: Formula) -> bool:
    concept = formula_concept(f)
    return isinstance(concept, INTERNAL_FORMS)


def full_label(node: TableauNode) -> FrozenSet[Formula]:
    """FullLabel(v) = Label(v) ∪ RFmls(v)，去掉 ⪯/⪰ 形式"""
    if node._full_label is None:
        node._full_label = frozenset(f for f in node.label | node.rfmls if not is_internal_formula(f))
    return node._full_label


class TableauGraph:
    """
    C_SHOQ 表格图 G = ⟨V, E, ν⟩

    边保存在 networkx.DiGraph 中，边属性 labels 为 EdgeLabel 集合
    （只有出发点是状态时才非空）。
    """

    def __init__(self):
        self.nodes: Dict[int, TableauNode] = {}
        self.edges = nx.DiGraph()
        self.cache: Dict[tuple, int] = {}
        self.root: Optional[int] = None
        self.version = 0
        # 状态变化日志 (节点, 旧状态, 新状态)
        self.status_log: List[Tuple[int, NodeStatus, NodeStatus]] = []
        # 变为 closed / closed-wrt / open 的节点，等待向前驱传播
        self.events: Deque[int] = deque()
        # 需要重新检查 UPS1 的节点
        self.dirty: Set[int] = set()
        # 边操作日志 ("new" | "reuse" | "delete", v, w)
        self.edge_log: List[Tuple[str, Optional[int], int]] = []
        self._reach_version = -1
        self._reach: Dict[int, Set[Optional[int]]] = {}

    # ------------------------------------------------------------------
    # 基本查询
    # ------------------------------------------------------------------

    def node(self, v: int) -> TableauNode:
        return self.nodes[v]

    def successors(self, v: int) -> List[int]:
        """按边的创建顺序"""
        return list(self.edges.successors(v))

    def predecessors(self, v: int) -> List[int]:
        return sorted(self.edges.predecessors(v))

    def elabels(self, v: int, w: int) -> List[EdgeLabel]:
        labels = self.edges.edges[v, w]["labels"] if self.edges.has_edge(v, w) else set()
        return sorted(labels, key=EdgeLabel.sort_key)

    def edge_count(self) -> int:
        return self.edges.number_of_edges()

    def full_label(self, v: int) -> FrozenSet[Formula]:
        return full_label(self.nodes[v])

    def il_variables(self, v: int) -> List[IlVar]:
        """状态 v 的全部 x_{w,e}（checkingFeasibility 边）"""
        result = []
        for w in self.successors(v):
            for e in self.elabels(v, w):
                if e.pi_t is EdgeType.CHECKING_FEASIBILITY:
                    result.append((w, e))
        return sorted(result, key=il_var_key)

    def il_problem(self, v: int, extra: Iterable[IfdlConstraint] = ()) -> IfdlProblem:
        node = self.nodes[v]
        constraints = list(node.il_constraints or []) + list(extra)
        return IfdlProblem(tuple(self.il_variables(v)), tuple(constraints))

    # ------------------------------------------------------------------
    # 修改
    # ------------------------------------------------------------------

    def _touch(self) -> None:
        self.version += 1

    @staticmethod
    def cache_key(node_type: NodeType, stype: SubType, label: FrozenSet[Formula]) -> tuple:
        # simple 节点的缓存不区分类型
        return (stype, node_type if stype is SubType.COMPLEX else None, label)

    def find_cached(self, node_type: NodeType, stype: SubType, label: FrozenSet[Formula]) -> Optional[int]:
        return self.cache.get(self.cache_key(node_type, stype, label))

    def add_edge(self, v: int, w: int, elabel: Optional[EdgeLabel] = None) -> None:
        source = self.nodes[v]
        if source.is_state and elabel is None:
            raise TableauDefectError(f"状态 {source.name} 的出边必须带标签")
        if not source.is_state and elabel is not None:
            raise TableauDefectError(f"非状态 {source.name} 的出边不能带标签")
        if not self.edges.has_edge(v, w):
            self.edges.add_edge(v, w, labels=set())
            self._touch()
        if elabel is not None:
            self.edges.edges[v, w]["labels"].add(elabel)

    def remove_edge(self, v: int, w: int) -> None:
        """删除边及其全部标签（规则 DN）"""
        self.edges.remove_edge(v, w)
        self.edge_log.append(("delete", v, w))
        self._touch()

    def _check_layers(self, v: Optional[int], stype: SubType, label: FrozenSet[Formula]) -> None:
        if stype is SubType.SIMPLE:
            if any(not isinstance(f, Concept) for f in label):
                raise TableauDefectError(f"简单节点的标签只能含概念: {show_label(label)}")
        elif any(not isinstance(f, Assertion) for f in label):
            raise TableauDefectError(f"复合节点的标签只能含断言: {show_label(label)}")
        if v is None:
            return
        source = self.nodes[v]
        if source.is_simple and stype is SubType.COMPLEX:
            raise TableauDefectError(f"不允许从简单节点 {source.name} 连到复合节点")
        if source.is_complex and stype is SubType.SIMPLE and not source.is_state:
            raise TableauDefectError(f"复合非状态 {source.name} 不能连到简单节点")
        if source.is_complex_state and stype is SubType.COMPLEX:
            raise TableauDefectError(f"复合状态 {source.name} 不能连到复合节点")

    def con_to_succ(self, v: Optional[int], node_type: NodeType, stype: SubType,
                    label: Iterable[Formula], rfmls: Iterable[Formula],
                    ind_repl: Optional[Dict[Individual, Individual]] = None,
                    elabel: Optional[EdgeLabel] = None) -> Tuple[int, bool]:
        """
        连接到后继（必要时创建）

        若存在标签相同且（类型相同或为简单节点）的节点 w，则复用：
        加边、把 rfmls 并入 RFmls(w)，v 为状态时把 elabel 并入边标签。

        Returns:
            Tuple[int, bool]: (后继编号, 是否新建)
        """
        label = frozenset(label)
        rfmls = frozenset(rfmls)
        self._check_layers(v, stype, label)

        w = self.find_cached(node_type, stype, label)
        if w is not None:
            node = self.nodes[w]
            if v is not None:
                self.add_edge(v, w, elabel)
            if not rfmls <= node.rfmls:
                node.rfmls = node.rfmls | rfmls
                node._full_label = None
                self.dirty.add(w)
                self._touch()
            self.edge_log.append(("reuse", v, w))
            return w, False

        w = len(self.nodes)
        if stype is SubType.COMPLEX:
            repl = dict(ind_repl) if ind_repl is not None else {a: a for a in sorted(label_individuals(label))}
        else:
            repl = None
        node = TableauNode(
            id=w, type=node_type, stype=stype, status=UNEXPANDED,
            label=label, rfmls=rfmls, ind_repl=repl,
            il_constraints=[] if node_type is NodeType.STATE else None,
        )
        self.nodes[w] = node
        self.cache[self.cache_key(node_type, stype, label)] = w
        self.edges.add_node(w)
        if v is not None:
            self.add_edge(v, w, elabel)
        self.dirty.add(w)
        self.edge_log.append(("new", v, w))
        self._touch()
        logger.debug(f"新建节点 {node.name} ({node_type.value}, {stype.value}): {show_label(label)}")
        return w, True

    def make_state(self, v: int) -> None:
        """简单非状态原地变为状态（规则 FS）"""
        node = self.nodes[v]
        if not node.is_simple or node.is_state:
            raise TableauDefectError(f"只有简单非状态可以原地变为状态: {node.name}")
        node.type = NodeType.STATE
        node.il_constraints = []
        self.dirty.add(v)
        self._touch()

    def set_status(self, v: int, status: NodeStatus) -> bool:
        """
        设置状态并检查状态不变式

        Returns:
            bool: 状态是否改变
        """
        node = self.nodes[v]
        old = node.status
        if old == status:
            return False
        if old.final:
            raise TableauDefectError(f"{node.name} 的状态 {old} 不能再改为 {status}")
        if old.kind is StatusKind.BLOCKED and status.kind not in (StatusKind.CLOSED, StatusKind.CLOSED_WRT):
            raise TableauDefectError(f"被阻塞的 {node.name} 只能变为 closed 或 closed-wrt，而不是 {status}")
        if status.kind is StatusKind.P_EXPANDED and not node.is_state:
            raise TableauDefectError(f"p-expanded 只用于状态: {node.name}")
        if status.kind is StatusKind.BLOCKED and not (node.is_simple and node.has_nominal()):
            raise TableauDefectError(f"blocked 只用于含名义的简单节点: {node.name}")
        if status.kind is StatusKind.CLOSED_WRT:
            for u in status.wrt:
                if not self.nodes[u].is_complex_state:
                    raise TableauDefectError(f"closed-wrt 集合中的 v{u} 不是复合状态")
        node.status = status
        self.status_log.append((v, old, status))
        if status.kind in (StatusKind.CLOSED, StatusKind.OPEN, StatusKind.CLOSED_WRT):
            self.events.append(v)
        self.dirty.add(v)
        self._touch()
        logger.debug(f"{node.name} 状态: {old} -> {status}")
        return True

    def set_closed_wrt(self, v: int, u: int) -> bool:
        """SetClosedWrt(v, u)：把 u 并入 closed-wrt 集合"""
        status = self.nodes[v].status
        if status.final or status.is_closed_wrt(u):
            return False
        if status.kind is StatusKind.CLOSED_WRT:
            return self.set_status(v, closed_wrt(status.wrt | {u}))
        return self.set_status(v, closed_wrt({u}))

    # ------------------------------------------------------------------
    # 可达性
    # ------------------------------------------------------------------

    def _passable(self, x: int, complex_state: Optional[int]) -> bool:
        """路径上的中间节点：不是 open/closed，且 closed-wrt 集合不含路径上的节点"""
        status = self.nodes[x].status
        if status.final:
            return False
        if status.kind is StatusKind.CLOSED_WRT and complex_state is not None:
            # 路径上的复合状态至多一个
            return complex_state not in status.wrt
        return True

    def reachability(self) -> Dict[int, Set[Optional[int]]]:
        """节点 -> 可达路径上经过的复合状态集合（None 表示未经过）"""
        if self._reach_version == self.version:
            return self._reach
        reach: Dict[int, Set[Optional[int]]] = defaultdict(set)
        if self.root is not None:
            reach[self.root].add(None)
            stack = [(self.root, None)]
            while stack:
                x, complex_state = stack.pop()
                if not self._passable(x, complex_state):
                    continue
                for y in self.successors(x):
                    through = y if self.nodes[y].is_complex_state else complex_state
                    if through not in reach[y]:
                        reach[y].add(through)
                        stack.append((y, through))
        self._reach = dict(reach)
        self._reach_version = self.version
        return self._reach

    def may_affect_root(self, v: int, through: Optional[int] = None) -> bool:
        """
        v 是否可能影响根的状态

        存在路径 ν = v0, …, vn = v，其中每个 vi（i < n）都不是 open/closed，
        且 closed-wrt(U) 时 U 与 {v0, …, vi} 不相交；through 非空时要求路径经过它。
        """
        reach = self.reachability()
        if v not in reach:
            return False
        if through is None:
            return True
        if self.nodes[through].is_complex_state:
            return through in reach[v]
        return self._path_through(v, through)

    def _path_through(self, v: int, through: int) -> bool:
        start = (self.root, None, False)
        seen = {start}
        stack = [start]
        while stack:
            x, complex_state, passed = stack.pop()
            if x == v and passed:
                return True
            if not self._passable(x, complex_state):
                continue
            for y in self.successors(x):
                state = (y, y if self.nodes[y].is_complex_state else complex_state, passed or y == through)
                if state not in seen:
                    seen.add(state)
                    stack.append(state)
        return False

    def complex_states_through(self, v: int) -> List[int]:
        """所有复合状态 u，使 v 可经过 u 影响根"""
        reach = self.reachability()
        return sorted(u for u in reach.get(v, ()) if u is not None)

    # ------------------------------------------------------------------
    # 不变式检查（测试模式）
    # ------------------------------------------------------------------

    def check_invariants(self) -> List[str]:
        """扫描整个图，返回违反的结构不变式"""
        problems: List[str] = []
        seen: Dict[tuple, int] = {}
        for node in self.nodes.values():
            key = self.cache_key(node.type, node.stype, node.label)
            if key in seen:
                problems.append(f"全局缓存冲突: v{seen[key]} 与 {node.name}")
            seen[key] = node.id
            status = node.status
            if status.kind is StatusKind.P_EXPANDED and not node.is_state:
                problems.append(f"{node.name} p-expanded 但不是状态")
            if status.kind is StatusKind.BLOCKED and not (node.is_simple and node.has_nominal()):
                problems.append(f"{node.name} blocked 但不是含名义的简单节点")
            if status.kind is StatusKind.CLOSED_WRT:
                if not status.wrt or any(not self.nodes[u].is_complex_state for u in status.wrt):
                    problems.append(f"{node.name} 的 closed-wrt 集合不合法")
            if node.is_simple and any(not isinstance(f, Concept) for f in node.label):
                problems.append(f"{node.name} 简单节点标签含断言")
            if node.is_complex and any(not isinstance(f, Assertion) for f in node.label):
                problems.append(f"{node.name} 复合节点标签含概念")
        root = self.nodes.get(self.root)
        if root is None or not root.is_complex or root.is_state:
            problems.append("根必须是复合非状态")
        for v, w, data in self.edges.edges(data=True):
            source, target = self.nodes[v], self.nodes[w]
            if source.is_simple and target.is_complex:
                problems.append(f"简单到复合的边 {source.name}->{target.name}")
            if source.is_complex and target.is_simple and not source.is_complex_state:
                problems.append(f"复合到简单的边不是从复合状态出发 {source.name}->{target.name}")
            if bool(data["labels"]) != source.is_state:
                problems.append(f"边 {source.name}->{target.name} 的标签与出发点类型不符")
        for v, old, new in self.status_log:
            if old.final:
                problems.append(f"v{v} 的最终状态 {old} 被改为 {new}")
            if old.kind is StatusKind.BLOCKED and new.kind not in (StatusKind.CLOSED, StatusKind.CLOSED_WRT):
                problems.append(f"v{v} 从 blocked 变为 {new}")
        return problems

    def describe(self, v: int) -> str:
        node = self.nodes[v]
        text = f"{node.name} [{node.type.value}, {node.stype.value}, {node.status}] {show_label(node.label)}"
        if node.rfmls:
            text += f" RFmls={show_label(node.rfmls)}"
        return text


def init_tableau(kb) -> TableauGraph:
    """
    初始化：根标签为 A ∪ {a:C | C ∈ T，a 为 A 或 T 中出现的个体}

    Returns:
        TableauGraph: 只有根节点的表格图
    """
    label: Set[Formula] = set(kb.abox)
    for c in kb.tbox:
        for a in kb.individuals:
            label.add(Instance(a, c))
    graph = TableauGraph()
    root, _ = graph.con_to_succ(None, NodeType.NON_STATE, SubType.COMPLEX, label, ())
    graph.root = root
    logger.info(f"表格图初始化完成: 根标签含 {len(label)} 个公式")
    return graph
