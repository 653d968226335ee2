#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
表格规则引擎模块
按优先级调度七组规则（UPS、US、DN、NUS、FS、TP、TF），
传播节点状态，并在不动点时给出可满足性结论
"""

import logging
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import (Callable, Deque, Dict, FrozenSet, Iterable, Iterator, List,
                    Optional, Set, Tuple)

import networkx as nx
import psutil

from ilp_feasibility import DEFAULT_NODE_BUDGET, IfdlConstraint, check_feasibility, format_constraint
from logic_core import (
    And, AtLeast, AtMost, Bot, Concept, Eq, Exists, Forall, Formula, Individual,
    Instance, NegNominal, NegRoleAssertion, Nominal, NotEq, Or, PrecEq,
    ResourceLimitError, RoleAssertion, SuccEq, TableauDefectError, canonical,
    negate_nnf, relevant_atmost_one, assertion_relevant_atmost_one,
    show_formula, substitute_formula,
)
from tableau_graph import (
    BLOCKED, CLOSED, F_EXPANDED, OPEN, P_EXPANDED, EdgeLabel, EdgeType, IlVar,
    NodeType, StatusKind, SubType, TableauGraph, full_label, init_tableau, show_il_var,
)

logger = logging.getLogger(__name__)

DEFAULT_STEP_LIMIT = 10 ** 6
SELECTION_STRATEGIES = ("depth-first", "fifo")


class RuleKind(Enum):
    UPS1 = "UPS1"
    UPS2 = "UPS2"
    UPS3 = "UPS3"
    US1 = "US1"
    US2 = "US2"
    US3 = "US3"
    DN = "DN"
    NUS = "NUS"
    FS = "FS"
    TP = "TP"
    TF = "TF"


class PropagationQueue:
    """UPS3 任务的先进先出队列：(前驱, 触发的后继)，同一任务至多排队一次"""

    def __init__(self):
        self._queue: Deque[Tuple[int, Optional[int]]] = deque()
        self._pending: Set[Tuple[int, Optional[int]]] = set()

    def push(self, v: int, cause: Optional[int]) -> bool:
        task = (v, cause)
        if task in self._pending:
            return False
        self._pending.add(task)
        self._queue.append(task)
        return True

    def pop(self) -> Tuple[int, Optional[int]]:
        task = self._queue.popleft()
        self._pending.discard(task)
        return task

    def __len__(self) -> int:
        return len(self._queue)


@dataclass
class RunStats:
    """一次运行的统计数据"""
    nodes: int = 0
    edges: int = 0
    steps: int = 0
    rule_counts: Counter = field(default_factory=Counter)
    ilp_calls: int = 0
    ilp_nodes: int = 0
    max_ilp_vars: int = 0
    elapsed: float = 0.0
    rss_bytes: int = 0

    def lines(self) -> List[str]:
        result = [
            f"nodes: {self.nodes}",
            f"edges: {self.edges}",
            f"steps: {self.steps}",
            f"ilp_calls: {self.ilp_calls}",
            f"ilp_nodes: {self.ilp_nodes}",
            f"max_ilp_vars: {self.max_ilp_vars}",
            f"elapsed_ms: {self.elapsed * 1000:.1f}",
            f"rss_mb: {self.rss_bytes / (1024 * 1024):.1f}",
        ]
        for kind in RuleKind:
            if self.rule_counts[kind.value]:
                result.append(f"rule {kind.value}: {self.rule_counts[kind.value]}")
        return result


@dataclass
class ReasoningResult:
    satisfiable: bool
    graph: TableauGraph
    stats: RunStats
    trace: List[str]


def _split(f: Formula) -> Optional[Tuple[Optional[Individual], Concept]]:
    """α:C 拆为 (α, C)；简单节点的概念 α 为 None；其他断言返回 None"""
    if isinstance(f, Instance):
        return f.individual, f.concept
    if isinstance(f, Concept):
        return None, f
    return None


def _tag(alpha: Optional[Individual], c: Concept) -> Formula:
    return c if alpha is None else Instance(alpha, c)


def _complement(f: Formula) -> Optional[Formula]:
    """冲突检测用的否定；⪯/⪰ 形式没有否定"""
    if isinstance(f, (PrecEq, SuccEq)):
        return None
    if isinstance(f, Instance):
        if isinstance(f.concept, (PrecEq, SuccEq)):
            return None
        return Instance(f.individual, negate_nnf(f.concept))
    if isinstance(f, Concept):
        return negate_nnf(f)
    if isinstance(f, RoleAssertion):
        return NegRoleAssertion(f.role, f.source, f.target)
    if isinstance(f, NegRoleAssertion):
        return RoleAssertion(f.role, f.source, f.target)
    if isinstance(f, Eq):
        return NotEq(f.left, f.right)
    return Eq(f.left, f.right)


def _is_trivial(f: Formula) -> bool:
    """a:{a} 在任何解释中都成立"""
    return isinstance(f, Instance) and isinstance(f.concept, Nominal) and f.concept.individual == f.individual


def _has_clash(concepts: Iterable[Concept]) -> bool:
    concepts = set(concepts)
    return any(negate_nnf(c) in concepts for c in concepts)


class TableauReasoner:
    """
    C_SHOQ 表格推理器

    UPS 规则优先并且全局检查；其后是 US 规则；
    最后在一个可能影响根状态的节点上应用 DN/NUS/FS/TP/TF 中第一个适用的规则。
    """

    def __init__(self, kb, node_budget: int = DEFAULT_NODE_BUDGET,
                 step_limit: int = DEFAULT_STEP_LIMIT, selection: str = "depth-first",
                 trace: bool = False, check_invariants: bool = False):
        if selection not in SELECTION_STRATEGIES:
            raise ValueError(f"未知的节点选择策略: {selection}")
        self.kb = kb
        self.rbox = kb.rbox
        self.tbox: FrozenSet[Concept] = frozenset(kb.tbox)
        self.node_budget = node_budget
        self.step_limit = step_limit
        self.selection = selection
        self.tracing = trace
        self.check_invariants = check_invariants
        self.order = {a: i for i, a in enumerate(kb.individuals)}

        self.graph: Optional[TableauGraph] = None
        self.queue = PropagationQueue()
        self.stats = RunStats()
        self.trace: List[str] = []
        self._details: List[str] = []
        self._us_checked: Dict[int, int] = {}
        self._ups2_version = -1
        self._nominal_nodes: List[int] = []
        self._scanned = 0

    # ------------------------------------------------------------------
    # 运行
    # ------------------------------------------------------------------

    def run(self) -> ReasoningResult:
        """
        构造表格直到根状态确定或不再有可能影响根的改变

        Returns:
            ReasoningResult: satisfiable 为 True 当且仅当根的最终状态不是 closed

        Raises:
            ResourceLimitError: 整数规划节点预算或规则步数上限被超出
        """
        start = time.perf_counter()
        self.graph = init_tableau(self.kb)
        graph = self.graph
        if self.tracing:
            self.trace.append(f"init v{graph.root}: {len(graph.node(graph.root).label)} formulas")

        while True:
            self._propagate_statuses()
            if graph.node(graph.root).status.final:
                break
            if self._apply_unary_static():
                continue
            v = self._select()
            if v is None:
                break
            self._expand(v)

        root_status = graph.node(graph.root).status
        satisfiable = root_status.kind is not StatusKind.CLOSED
        self.stats.nodes = len(graph.nodes)
        self.stats.edges = graph.edge_count()
        self.stats.elapsed = time.perf_counter() - start
        self.stats.rss_bytes = psutil.Process().memory_info().rss
        verdict = "SAT" if satisfiable else "UNSAT"
        logger.info(f"推理结束: {verdict}, 根状态 {root_status}, {self.stats.nodes} 个节点, "
                    f"{self.stats.steps} 步, 耗时 {self.stats.elapsed:.3f}s")
        if self.tracing:
            self.trace.append(f"result {verdict}")
        return ReasoningResult(satisfiable, graph, self.stats, self.trace)

    def _apply(self, kind: RuleKind, v: int, action: Callable[[], bool]) -> bool:
        """执行一条规则并记录步数、直方图与跟踪行"""
        graph = self.graph
        edge_mark = len(graph.edge_log)
        status_mark = len(graph.status_log)
        self._details = []
        applied = action()
        if not applied:
            return False
        self.stats.steps += 1
        self.stats.rule_counts[kind.value] += 1
        if self.stats.steps > self.step_limit:
            raise ResourceLimitError(f"规则应用次数超过上限 {self.step_limit}")
        if self.tracing:
            self.trace.append(self._trace_line(kind, v, edge_mark, status_mark))
            self.trace.extend(f"{'':>5} {'':<4} {line}" for line in self._details)
        if self.check_invariants:
            problems = graph.check_invariants()
            if problems:
                raise TableauDefectError(f"{kind.value} 作用于 v{v} 后违反不变式: {'; '.join(problems)}")
        return True

    def _trace_line(self, kind: RuleKind, v: int, edge_mark: int, status_mark: int) -> str:
        graph = self.graph
        effects = []
        for op, source, target in graph.edge_log[edge_mark:]:
            origin = "" if source is None else f"v{source}->"
            effects.append(f"{op} {origin}v{target}")
        for node, old, new in graph.status_log[status_mark:]:
            effects.append(f"v{node} {old}->{new}")
        if kind is RuleKind.FS and graph.node(v).is_simple:
            effects.append(f"v{v} non-state->state")
        return f"{self.stats.steps:>5} {kind.value:<4} v{v}: {', '.join(effects) or '-'}"

    def _show_constraint(self, v: int, c: IfdlConstraint) -> str:
        """x_{w,e} 显示为 xw；同一后继有多个边标签时带上标签"""
        graph = self.graph
        names = []
        for w, e in c.vars:
            if len(graph.elabels(v, w)) == 1:
                names.append(f"x{w}")
            else:
                names.append(show_il_var((w, e)))
        return format_constraint(IfdlConstraint(tuple(names), c.bound, c.sense))

    # ------------------------------------------------------------------
    # UPS
    # ------------------------------------------------------------------

    def _propagate_statuses(self) -> None:
        """反复应用 UPS 规则直到没有可应用的为止"""
        graph = self.graph
        while not graph.node(graph.root).status.final:
            if graph.dirty:
                v = min(graph.dirty)
                graph.dirty.discard(v)
                self._apply(RuleKind.UPS1, v, lambda: self.rule_ups1(v))
                continue
            if graph.events:
                w = graph.events.popleft()
                for v in graph.predecessors(w):
                    self.queue.push(v, w)
                continue
            if len(self.queue):
                v, w = self.queue.pop()
                self._apply(RuleKind.UPS3, v, lambda: self.rule_ups3(v, w))
                continue
            if self._ups2_pass():
                continue
            return

    def rule_ups1(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        status = node.status
        if status.final:
            return False
        if self._is_clashing(v) or status.is_closed_wrt(v):
            return graph.set_status(v, CLOSED)
        if node.is_state and status == F_EXPANDED and not graph.successors(v):
            return graph.set_status(v, OPEN)
        return False

    def _is_clashing(self, v: int) -> bool:
        """UPS1 的条件 (a)(b)(c)"""
        node = self.graph.node(v)
        label = node.label
        fl = full_label(node)
        for f in label:
            parts = _split(f)
            if parts is not None and isinstance(parts[1], Bot):
                return True
            if isinstance(f, NotEq) and f.left == f.right:
                return True
        for f in fl:
            other = _complement(f)
            if other is not None and other in fl:
                return True
        if node.is_state or node.is_simple:
            return False
        for f in label:
            if isinstance(f, Instance) and isinstance(f.concept, AtMost):
                if self._counting_clash(node.label, fl, f.individual, f.concept):
                    return True
        return False

    @staticmethod
    def _counting_clash(label, fl, a: Individual, restriction: AtMost) -> bool:
        """存在 n+1 个两两不等的 b 满足 s(a,b)、b:C"""
        s, c, n = restriction.role, restriction.filler, restriction.n
        candidates = sorted(f.target for f in fl
                            if isinstance(f, RoleAssertion) and f.role == s and f.source == a
                            and Instance(f.target, c) in fl)
        if len(candidates) < n + 1:
            return False
        if n == 0:
            return True
        distinct = nx.Graph()
        distinct.add_nodes_from(candidates)
        for i, b in enumerate(candidates):
            for b2 in candidates[i + 1:]:
                if NotEq(b, b2) in label or NotEq(b2, b) in label:
                    distinct.add_edge(b, b2)
        return any(len(clique) >= n + 1 for clique in nx.find_cliques(distinct))

    def _ups2_pass(self) -> bool:
        """对所有含名义的简单节点检查 UPS2"""
        graph = self.graph
        if self._ups2_version == graph.version:
            return False
        while self._scanned < len(graph.nodes):
            node = graph.node(self._scanned)
            if node.is_simple and node.has_nominal():
                self._nominal_nodes.append(node.id)
            self._scanned += 1
        changed = False
        for v in self._nominal_nodes:
            if self._apply(RuleKind.UPS2, v, lambda: self.rule_ups2(v)):
                changed = True
        self._ups2_version = graph.version
        return changed

    def rule_ups2(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if not node.is_simple or node.status.final or not node.has_nominal():
            return False
        changed = False
        for u in graph.complex_states_through(v):
            if node.status.final or node.status.is_closed_wrt(u):
                continue
            if self._nominal_conflict(v, u):
                changed |= graph.set_closed_wrt(v, u)
        return changed

    def _nominal_conflict(self, v: int, u: int) -> bool:
        node = self.graph.node(v)
        target = self.graph.node(u)
        fl = full_label(target)
        for a in node.nominals():
            for c in node.label:
                phi = substitute_formula(Instance(a, negate_nnf(c)), target.ind_repl)
                if phi in fl:
                    return True
        return False

    def rule_ups3(self, v: int, trigger: Optional[int]) -> bool:
        graph = self.graph
        node = graph.node(v)
        if node.status.kind is StatusKind.UNEXPANDED or node.status.final:
            return False
        if not node.is_state:
            return self._ups3_non_state(v)
        changed = False
        if trigger is None:
            changed |= self._ups3_infeasible(v)
        elif graph.edges.has_edge(v, trigger):
            w_status = graph.node(trigger).status
            if w_status.kind is StatusKind.CLOSED:
                changed |= self._ups3_closed_successor(v, trigger)
            elif w_status.kind is StatusKind.CLOSED_WRT:
                changed |= self._ups3_closed_wrt_successor(v, trigger, w_status.wrt)
        if not node.status.final and node.status == F_EXPANDED:
            changed |= self._ups3_open(v)
        return changed

    def _ups3_infeasible(self, v: int) -> bool:
        """状态不是 closed 的必要条件：ILConstraints(v) ∪ {x = 0 | 后继 closed} 可行"""
        graph = self.graph
        node = graph.node(v)
        zeros = []
        for w, e in graph.il_variables(v):
            if graph.node(w).status.kind is StatusKind.CLOSED:
                zeros.append((w, e))
        if not node.il_constraints and not zeros:
            return False
        if not self._feasible(v, zeros):
            logger.debug(f"UPS3: v{v} 的整数线性约束不可行")
            return graph.set_status(v, CLOSED)
        return False

    def _ups3_non_state(self, v: int) -> bool:
        graph = self.graph
        successors = graph.successors(v)
        if not successors:
            return False
        statuses = [graph.node(w).status for w in successors]
        if any(s.kind is StatusKind.OPEN for s in statuses):
            return graph.set_status(v, OPEN)
        if all(s.kind is StatusKind.CLOSED for s in statuses):
            return graph.set_status(v, CLOSED)
        if all(s.kind in (StatusKind.CLOSED, StatusKind.CLOSED_WRT) for s in statuses):
            sets = [s.wrt for s in statuses if s.kind is StatusKind.CLOSED_WRT]
            common = frozenset.intersection(*sets)
            changed = False
            for u in sorted(common):
                changed |= graph.set_closed_wrt(v, u)
            return changed
        return False

    def _ups3_closed_successor(self, v: int, w: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        labels = graph.elabels(v, w)
        if any(e.pi_t is EdgeType.TESTING_CLOSEDNESS for e in labels):
            return graph.set_status(v, CLOSED)
        for e in labels:
            zero = IfdlConstraint.zero((w, e))
            if zero not in node.il_constraints:
                node.il_constraints.append(zero)
        if not self._feasible(v, ()):
            return graph.set_status(v, CLOSED)
        return False

    def _ups3_closed_wrt_successor(self, v: int, w: int, wrt: FrozenSet[int]) -> bool:
        graph = self.graph
        changed = False
        for u in sorted(wrt):
            node = graph.node(v)
            if node.status.final or node.status.is_closed_wrt(u):
                continue
            if not graph.may_affect_root(v, through=u):
                continue
            labels = graph.elabels(v, w)
            if any(e.pi_t is EdgeType.TESTING_CLOSEDNESS for e in labels):
                changed |= graph.set_closed_wrt(v, u)
                continue
            zeros = [(wi, e) for wi, e in graph.il_variables(v) if graph.node(wi).status.is_closed_wrt(u)]
            if not self._feasible(v, zeros):
                changed |= graph.set_closed_wrt(v, u)
        return changed

    def _ups3_open(self, v: int) -> bool:
        graph = self.graph
        for w in graph.successors(v):
            testing = any(e.pi_t is EdgeType.TESTING_CLOSEDNESS for e in graph.elabels(v, w))
            if testing and graph.node(w).status.kind is not StatusKind.OPEN:
                return False
        zeros = [(w, e) for w, e in graph.il_variables(v)
                 if graph.node(w).status.kind is not StatusKind.OPEN]
        if self._feasible(v, zeros):
            return graph.set_status(v, OPEN)
        return False

    def _feasible(self, v: int, zeros: Iterable[IlVar]) -> bool:
        problem = self.graph.il_problem(v, [IfdlConstraint.zero(x) for x in zeros])
        result = check_feasibility(problem, self.node_budget)
        self.stats.ilp_calls += 1
        self.stats.ilp_nodes += result.nodes
        self.stats.max_ilp_vars = max(self.stats.max_ilp_vars, len(problem.variables))
        return result.feasible

    def _schedule_successor_updates(self, v: int) -> None:
        """新连接的后继可能已有最终状态"""
        graph = self.graph
        for w in graph.successors(v):
            kind = graph.node(w).status.kind
            if kind in (StatusKind.CLOSED, StatusKind.OPEN, StatusKind.CLOSED_WRT):
                self.queue.push(v, w)
        if graph.node(v).is_state:
            self.queue.push(v, None)

    # ------------------------------------------------------------------
    # 节点选择
    # ------------------------------------------------------------------

    def _candidates(self) -> Iterator[int]:
        """可能影响根状态的节点，按选择策略排序"""
        graph = self.graph
        reach = graph.reachability()
        if self.selection == "fifo":
            yield from sorted(reach)
            return
        seen = {graph.root}
        yield graph.root
        stack = [iter(graph.successors(graph.root))]
        while stack:
            for y in stack[-1]:
                if y not in seen and y in reach:
                    seen.add(y)
                    yield y
                    stack.append(iter(graph.successors(y)))
                    break
            else:
                stack.pop()

    def _apply_unary_static(self) -> bool:
        graph = self.graph
        for v in self._candidates():
            node = graph.node(v)
            if node.status.kind is not StatusKind.UNEXPANDED or node.is_state:
                continue
            if self._us_checked.get(v) == len(node.rfmls):
                continue
            for kind, rule in ((RuleKind.US1, self.rule_us1), (RuleKind.US2, self.rule_us2),
                               (RuleKind.US3, self.rule_us3)):
                if self._apply(kind, v, lambda: rule(v)):
                    self._schedule_successor_updates(v)
                    return True
            self._us_checked[v] = len(node.rfmls)
        return False

    def _select(self) -> Optional[int]:
        graph = self.graph
        for v in self._candidates():
            node = graph.node(v)
            kind = node.status.kind
            if node.is_simple and node.has_nominal():
                if not node.status.final and (not node.blocked or self._dn_targets(v)):
                    return v
                continue
            if kind in (StatusKind.UNEXPANDED, StatusKind.P_EXPANDED):
                return v
        return None

    def _expand(self, v: int) -> None:
        for kind, rule in ((RuleKind.DN, self.rule_dn), (RuleKind.NUS, self.rule_nus),
                           (RuleKind.FS, self.rule_fs), (RuleKind.TP, self.rule_tp),
                           (RuleKind.TF, self.rule_tf)):
            if self._apply(kind, v, lambda: rule(v)):
                if kind is not RuleKind.DN:
                    self._schedule_successor_updates(v)
                return
        raise TableauDefectError(f"选中的节点 v{v} 没有可应用的规则")

    # ------------------------------------------------------------------
    # US
    # ------------------------------------------------------------------

    def rule_us1(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if node.is_state or node.status.kind is not StatusKind.UNEXPANDED:
            return False
        label = node.label
        removed: Set[Formula] = set(node.rfmls)
        added: Set[Formula] = set()
        edges: Dict[Tuple[str, Individual], List[Individual]] = {}
        for f in label:
            if isinstance(f, RoleAssertion):
                edges.setdefault((f.role, f.source), []).append(f.target)
                for s in self.rbox.supers(f.role):
                    added.add(RoleAssertion(s, f.source, f.target))
        for f in label:
            parts = _split(f)
            if parts is None:
                continue
            alpha, c = parts
            if isinstance(c, And):
                removed.add(f)
                added.add(_tag(alpha, c.left))
                added.add(_tag(alpha, c.right))
            elif isinstance(c, (AtLeast, AtMost)) and c.n == 0:
                removed.add(f)
                if isinstance(c, AtMost):
                    added.add(_tag(alpha, Forall(c.role, negate_nnf(c.filler))))
            elif isinstance(c, NegNominal) and alpha is not None:
                removed.add(f)
                added.add(NotEq(alpha, c.individual))
            elif isinstance(c, Forall):
                for r in self.rbox.subroles(c.role):
                    added.add(_tag(alpha, Forall(r, c.filler)))
                if alpha is not None:
                    for b in edges.get((c.role, alpha), ()):
                        added.add(Instance(b, c.filler))
                        if self.rbox.is_transitive(c.role):
                            added.add(Instance(b, c))
        new_label = (label | added) - removed
        if not new_label - label:
            return False
        graph.con_to_succ(v, NodeType.NON_STATE, node.stype, new_label, removed, node.ind_repl)
        graph.set_status(v, F_EXPANDED)
        return True

    def rule_us2(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if not node.is_complex or node.is_state or node.status.kind is not StatusKind.UNEXPANDED:
            return False
        trigger = next((f for f in canonical(node.label)
                        if isinstance(f, Instance) and isinstance(f.concept, Nominal)), None)
        if trigger is None:
            return False
        a, b = trigger.individual, trigger.concept.individual
        mapping = {b: a}
        label = {substitute_formula(f, mapping, keep_equalities=True) for f in node.label if f != trigger}
        label |= {Eq(a, b), Eq(b, a)}
        rfmls = {substitute_formula(f, mapping) for f in node.rfmls}
        rfmls.add(Instance(a, Nominal(a)))
        w, _ = graph.con_to_succ(v, NodeType.NON_STATE, SubType.COMPLEX, label, rfmls, node.ind_repl)
        self._redirect(node.ind_repl, graph.node(w).ind_repl, b, a)
        graph.set_status(v, F_EXPANDED)
        return True

    @staticmethod
    def _redirect(source: Dict[Individual, Individual], target: Dict[Individual, Individual],
                  old: Individual, new: Individual) -> None:
        target[old] = new
        for c, d in source.items():
            if d == old:
                target[c] = new

    def rule_us3(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if node.is_state or node.status.kind is not StatusKind.UNEXPANDED:
            return False
        if node.is_simple:
            extra: Set[Formula] = set(relevant_atmost_one(self.tbox, node.label, self.rbox))
        else:
            extra = set()
            subjects = sorted({f.individual for f in node.label if isinstance(f, Instance)}, key=self._rank)
            for a in subjects:
                extra |= assertion_relevant_atmost_one(self.tbox, node.label, a, self.rbox)
        if not extra - node.label:
            return False
        graph.con_to_succ(v, NodeType.NON_STATE, node.stype, node.label | extra, node.rfmls, node.ind_repl)
        graph.set_status(v, F_EXPANDED)
        return True

    # ------------------------------------------------------------------
    # DN
    # ------------------------------------------------------------------

    def _dn_targets(self, v: int) -> List[Tuple[int, List[Formula], List[Formula]]]:
        """(复合状态 u, X, X 中不在 FullLabel(u) 里的公式)，只列出 X ⊄ FullLabel(u) 的 u"""
        graph = self.graph
        node = graph.node(v)
        result = []
        for u in graph.complex_states_through(v):
            if node.status.is_closed_wrt(u):
                continue
            target = graph.node(u)
            formulas = {substitute_formula(Instance(a, c), target.ind_repl)
                        for a in node.nominals() for c in node.label}
            formulas = canonical(f for f in formulas if not _is_trivial(f))
            fl = full_label(target)
            missing = [f for f in formulas if f not in fl]
            if missing:
                result.append((u, formulas, missing))
        return result

    def rule_dn(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if not node.is_simple or node.status.final or not node.has_nominal():
            return False
        targets = self._dn_targets(v)
        if node.blocked and not targets:
            return False
        for u, formulas, missing in targets:
            for u0 in graph.predecessors(u):
                if graph.successors(u0) != [u]:
                    raise TableauDefectError(f"DN: v{u0} 除 v{u} 外还有其他后继")
                parent = graph.node(u0)
                graph.remove_edge(u0, u)
                graph.con_to_succ(u0, NodeType.NON_STATE, SubType.COMPLEX,
                                  parent.label | set(formulas), parent.rfmls, parent.ind_repl)
                for phi in missing:
                    negated = Instance(phi.individual, negate_nnf(phi.concept))
                    graph.con_to_succ(u0, NodeType.NON_STATE, SubType.COMPLEX,
                                      parent.label | {negated}, parent.rfmls, parent.ind_repl)
                self._schedule_successor_updates(u0)
                logger.debug(f"DN: v{v} 使 v{u0} 在 v{u} 处重新展开")
        node.blocked = True
        if node.status.kind in (StatusKind.UNEXPANDED, StatusKind.BLOCKED):
            graph.set_status(v, BLOCKED)
        return True

    # ------------------------------------------------------------------
    # NUS
    # ------------------------------------------------------------------

    def _rank(self, a: Individual) -> Tuple[int, str]:
        return (self.order.get(a, len(self.order)), a)

    def rule_nus(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if node.is_state or node.status.kind is not StatusKind.UNEXPANDED:
            return False
        for subrule in (self._nus_disjunction, self._nus_semantic_branch,
                        self._nus_merge, self._nus_role_branch):
            branches = subrule(v)
            if branches is not None:
                for label, rfmls, redirect in branches:
                    w, _ = graph.con_to_succ(v, NodeType.NON_STATE, node.stype, label, rfmls, node.ind_repl)
                    if redirect is not None:
                        self._redirect(node.ind_repl, graph.node(w).ind_repl, *redirect)
                graph.set_status(v, F_EXPANDED)
                return True
        return False

    def _nus_disjunction(self, v: int):
        node = self.graph.node(v)
        fl = full_label(node)
        for f in canonical(node.label):
            parts = _split(f)
            if parts is None or not isinstance(parts[1], Or):
                continue
            alpha, c = parts
            left, right = _tag(alpha, c.left), _tag(alpha, c.right)
            if left in fl or right in fl:
                continue
            rest = node.label - {f}
            rfmls = node.rfmls | {f}
            return [(rest | {left}, rfmls, None), (rest | {right}, rfmls, None)]
        return None

    def _nus_semantic_branch(self, v: int):
        node = self.graph.node(v)
        if not node.is_complex:
            return None
        fl = full_label(node)
        label = canonical(node.label)
        for f in label:
            if not isinstance(f, RoleAssertion):
                continue
            a, b, s = f.source, f.target, f.role
            for g in label:
                if not isinstance(g, Instance) or g.individual != a:
                    continue
                c = g.concept
                if isinstance(c, AtMost) and c.role == s:
                    pass
                elif isinstance(c, (AtLeast, Exists)) and c.role == s and self.kb.is_numeric(s):
                    pass
                else:
                    continue
                positive = Instance(b, c.filler)
                negative = Instance(b, negate_nnf(c.filler))
                if positive in fl or negative in fl:
                    continue
                return [(node.label | {positive}, node.rfmls, None),
                        (node.label | {negative}, node.rfmls, None)]
        return None

    def _nus_merge(self, v: int):
        node = self.graph.node(v)
        if not node.is_complex:
            return None
        fl = full_label(node)
        for f in canonical(fl):
            if not isinstance(f, Instance) or not isinstance(f.concept, AtMost):
                continue
            a, s, c = f.individual, f.concept.role, f.concept.filler
            members = sorted({g.target for g in fl
                              if isinstance(g, RoleAssertion) and g.role == s and g.source == a
                              and Instance(g.target, c) in fl}, key=self._rank)
            for i, b in enumerate(members):
                for b2 in members[i + 1:]:
                    if NotEq(b, b2) in node.label or NotEq(b2, b) in node.label:
                        continue
                    distinct = node.label | {NotEq(b, b2), NotEq(b2, b)}
                    mapping = {b2: b}
                    merged = {substitute_formula(g, mapping, keep_equalities=True) for g in node.label}
                    merged |= {Eq(b, b2), Eq(b2, b)}
                    rfmls = {substitute_formula(g, mapping) for g in node.rfmls}
                    return [(distinct, node.rfmls, None), (merged, rfmls, (b2, b))]
        return None

    def _nus_role_branch(self, v: int):
        node = self.graph.node(v)
        if not node.is_complex:
            return None
        label = canonical(node.label)
        for f in label:
            if not isinstance(f, Instance) or not isinstance(f.concept, AtMost):
                continue
            a, r = f.individual, f.concept.role
            targets = [g.target for g in label
                       if isinstance(g, RoleAssertion) and g.role == r and g.source == a]
            if not targets:
                continue
            for g in label:
                if not isinstance(g, Instance) or g.individual != a:
                    continue
                if not isinstance(g.concept, (AtLeast, Exists)):
                    continue
                s = g.concept.role
                if not self.rbox.is_subrole(s, r):
                    continue
                for b in targets:
                    positive = RoleAssertion(s, a, b)
                    negative = NegRoleAssertion(s, a, b)
                    if positive in node.label or negative in node.label:
                        continue
                    return [(node.label | {positive}, node.rfmls, None),
                            (node.label | {negative}, node.rfmls, None)]
        return None

    # ------------------------------------------------------------------
    # FS、TP、TF
    # ------------------------------------------------------------------

    def rule_fs(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if node.is_state or node.status.kind is not StatusKind.UNEXPANDED:
            return False
        if node.is_simple:
            graph.make_state(v)
            return True
        fl = full_label(node)
        label = set(node.label)
        for f in canonical(node.label):
            if not isinstance(f, Instance):
                continue
            a, c = f.individual, f.concept
            if isinstance(c, AtMost):
                m = self._named_witnesses(fl, a, c.role, c.filler)
                if m > c.n:
                    raise TableauDefectError(f"FS: v{v} 中 {f} 已被 {m} 个个体违反")
                label.add(Instance(a, PrecEq(c.n - m, c.role, c.filler)))
            elif isinstance(c, (AtLeast, Exists)) and self.kb.is_numeric(c.role):
                n = 1 if isinstance(c, Exists) else c.n
                m = self._named_witnesses(fl, a, c.role, c.filler)
                if n > m:
                    label.add(Instance(a, SuccEq(n - m, c.role, c.filler)))
        graph.con_to_succ(v, NodeType.STATE, SubType.COMPLEX, label, node.rfmls, node.ind_repl)
        graph.set_status(v, F_EXPANDED)
        return True

    @staticmethod
    def _named_witnesses(fl, a: Individual, s: str, d: Concept) -> int:
        return len({f.target for f in fl
                    if isinstance(f, RoleAssertion) and f.role == s and f.source == a
                    and Instance(f.target, d) in fl})

    def _successor_label(self, gamma: Iterable[Formula], alpha: Optional[Individual],
                         r: str, d: Concept) -> FrozenSet[Concept]:
        """{D} ∪ {D' | α:∀r.D'} ∪ {∀s.D' | α:∀s.D', r ⊑ s, Trans(s)} ∪ T"""
        result: Set[Concept] = {d}
        for f in gamma:
            parts = _split(f)
            if parts is None or parts[0] != alpha or not isinstance(parts[1], Forall):
                continue
            c = parts[1]
            if c.role == r:
                result.add(c.filler)
            if self.rbox.is_subrole(r, c.role) and self.rbox.is_transitive(c.role):
                result.add(c)
        return frozenset(result | self.tbox)

    def rule_tp(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if not node.is_state or node.status.kind is not StatusKind.UNEXPANDED:
            return False
        for f in canonical(node.label):
            parts = _split(f)
            if parts is None or not isinstance(parts[1], Exists):
                continue
            alpha, c = parts
            if self.kb.is_numeric(c.role):
                continue
            label = self._successor_label(node.label, alpha, c.role, c.filler)
            elabel = EdgeLabel(EdgeType.TESTING_CLOSEDNESS, self.rbox.supers(c.role), alpha)
            graph.con_to_succ(v, NodeType.NON_STATE, SubType.SIMPLE, label, (), None, elabel)
        graph.set_status(v, P_EXPANDED)
        return True

    def _requirements(self, v: int) -> List[Formula]:
        """TF 的 Γ"""
        node = self.graph.node(v)
        gamma = set(node.label)
        if node.is_simple:
            for c in node.label:
                if isinstance(c, AtMost):
                    gamma.add(PrecEq(c.n, c.role, c.filler))
                elif isinstance(c, AtLeast):
                    gamma.add(SuccEq(c.n, c.role, c.filler))
                elif isinstance(c, Exists) and self.kb.is_numeric(c.role):
                    gamma.add(SuccEq(1, c.role, c.filler))
        return canonical(gamma)

    def rule_tf(self, v: int) -> bool:
        graph = self.graph
        node = graph.node(v)
        if not node.is_state or node.status.kind is not StatusKind.P_EXPANDED:
            return False
        gamma = self._requirements(v)
        lower = [(alpha, c) for alpha, c in filter(None, map(_split, gamma)) if isinstance(c, SuccEq)]
        upper = [(alpha, c) for alpha, c in filter(None, map(_split, gamma)) if isinstance(c, PrecEq)]

        tuples: Dict[Tuple[FrozenSet[str], FrozenSet[Concept], Optional[Individual]], None] = {}
        for alpha, c in lower:
            roles = self.rbox.supers(c.role)
            tuples.setdefault((roles, self._successor_label(gamma, alpha, c.role, c.filler), alpha), None)

        for alpha, c in upper:
            refined: Dict[tuple, None] = {}
            negated = negate_nnf(c.filler)
            for roles, label, beta in tuples:
                if beta == alpha and c.role in roles and c.filler not in label and negated not in label:
                    refined.setdefault((roles, label | {c.filler}, beta), None)
                    refined.setdefault((roles, label | {negated}, beta), None)
                else:
                    refined.setdefault((roles, label, beta), None)
            tuples = refined

        added = True
        while added:
            added = False
            for alpha, c in upper:
                members = [t for t in tuples if t[2] == alpha and c.role in t[0] and c.filler in t[1]]
                for i, first in enumerate(members):
                    for second in members[i + 1:]:
                        merged = (first[0] | second[0], first[1] | second[1], alpha)
                        if merged in tuples or _has_clash(merged[1]):
                            continue
                        tuples[merged] = None
                        added = True

        for roles, label, alpha in tuples:
            elabel = EdgeLabel(EdgeType.CHECKING_FEASIBILITY, roles, alpha)
            graph.con_to_succ(v, NodeType.NON_STATE, SubType.SIMPLE, label, (), None, elabel)

        variables = graph.il_variables(v)
        constraints = [IfdlConstraint.ge([x], 0) for x in variables]
        for alpha, c in lower + upper:
            members = [(w, e) for w, e in variables
                       if c.role in e.pi_r and e.pi_i == alpha and c.filler in graph.node(w).label]
            if isinstance(c, SuccEq):
                constraints.append(IfdlConstraint.ge(members, c.n))
            else:
                constraints.append(IfdlConstraint.le(members, c.n))
            if self.tracing:
                self._details.append(f"v{v} {show_formula(_tag(alpha, c))}: "
                                     f"{self._show_constraint(v, constraints[-1])}")
        node.il_constraints = constraints
        graph.set_status(v, F_EXPANDED)
        logger.debug(f"TF: v{v} 有 {len(variables)} 个整数变量, {len(constraints)} 条约束")
        return True


def check_satisfiability(kb, **options) -> ReasoningResult:
    """便捷入口：构造推理器并运行"""
    return TableauReasoner(kb, **options).run()
