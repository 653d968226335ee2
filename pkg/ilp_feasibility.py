#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
整数线性可行性模块
判定系数为 0/1 的整数线性约束系统（IFDL 问题）是否有非负整数解：
按连通分量分解后做深度优先的分支定界；另提供三个独立的预言机用于测试
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from itertools import combinations_with_replacement
from math import comb
from typing import Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from logic_core import OraclePreconditionError, ResourceLimitError

logger = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10 ** 6
ENUMERATION_LIMIT = 5_000_000
DEFAULT_RUN_LIMIT = 200_000


class Sense(Enum):
    GE = ">="
    LE = "<="
    EQ0 = "="


@dataclass(frozen=True)
class IfdlConstraint:
    """
    约束 Σ_{x ∈ vars} x ⋈ bound（系数均为 1）

    EQ0 约束只有一个变量且 bound 为 0。
    """
    vars: Tuple[Hashable, ...]
    bound: int
    sense: Sense

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError(f"约束右端必须非负: {self.bound}")
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"约束中的变量重复: {self.vars}")
        if self.sense is Sense.EQ0 and (len(self.vars) != 1 or self.bound != 0):
            raise ValueError("EQ0 约束必须恰好含一个变量且右端为 0")

    @classmethod
    def ge(cls, variables: Iterable[Hashable], bound: int) -> "IfdlConstraint":
        return cls(tuple(variables), bound, Sense.GE)

    @classmethod
    def le(cls, variables: Iterable[Hashable], bound: int) -> "IfdlConstraint":
        return cls(tuple(variables), bound, Sense.LE)

    @classmethod
    def zero(cls, variable: Hashable) -> "IfdlConstraint":
        return cls((variable,), 0, Sense.EQ0)

    def holds(self, values: Dict[Hashable, int]) -> bool:
        total = sum(values.get(x, 0) for x in self.vars)
        if self.sense is Sense.GE:
            return total >= self.bound
        if self.sense is Sense.LE:
            return total <= self.bound
        return total == 0


@dataclass(frozen=True)
class IfdlProblem:
    """变量集合与约束列表，所有变量隐含 x ≥ 0"""
    variables: Tuple[Hashable, ...]
    constraints: Tuple[IfdlConstraint, ...] = ()

    def __post_init__(self):
        known = set(self.variables)
        for c in self.constraints:
            missing = [x for x in c.vars if x not in known]
            if missing:
                raise ValueError(f"约束使用了未声明的变量: {missing}")

    def with_constraints(self, extra: Iterable[IfdlConstraint]) -> "IfdlProblem":
        return IfdlProblem(self.variables, self.constraints + tuple(extra))

    def with_zeros(self, variables: Iterable[Hashable]) -> "IfdlProblem":
        return self.with_constraints(IfdlConstraint.zero(x) for x in variables)

    def is_satisfied_by(self, values: Dict[Hashable, int]) -> bool:
        return (all(values.get(x, 0) >= 0 for x in self.variables)
                and all(c.holds(values) for c in self.constraints))

    def derived_cap(self) -> int:
        """最小解中每个变量都不超过 GE 约束右端的最大值"""
        return max((c.bound for c in self.constraints if c.sense is Sense.GE), default=0)


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    witness: Optional[Dict[Hashable, int]] = None
    nodes: int = 0
    components: int = 0

    def __bool__(self) -> bool:
        return self.feasible


# ---------------------------------------------------------------------------
# 分解
# ---------------------------------------------------------------------------

def decompose(problem: IfdlProblem) -> List[IfdlProblem]:
    """
    按共享约束关系把变量划分为连通分量

    没有变量的约束单独组成一个子问题。

    Returns:
        List[IfdlProblem]: 子问题，按分量中最先声明的变量排序
    """
    position = {x: i for i, x in enumerate(problem.variables)}
    graph = nx.Graph()
    graph.add_nodes_from(problem.variables)
    for c in problem.constraints:
        for a, b in zip(c.vars, c.vars[1:]):
            graph.add_edge(a, b)

    components = sorted((sorted(comp, key=position.__getitem__) for comp in nx.connected_components(graph)),
                        key=lambda comp: position[comp[0]])
    owner = {x: i for i, comp in enumerate(components) for x in comp}
    buckets: List[List[IfdlConstraint]] = [[] for _ in components]
    orphans: List[IfdlConstraint] = []
    for c in problem.constraints:
        if c.vars:
            buckets[owner[c.vars[0]]].append(c)
        else:
            orphans.append(c)
    parts = [IfdlProblem(tuple(comp), tuple(bucket)) for comp, bucket in zip(components, buckets)]
    if orphans:
        parts.append(IfdlProblem((), tuple(orphans)))
    return parts


# ---------------------------------------------------------------------------
# 分支定界
# ---------------------------------------------------------------------------

class _BranchAndBound:
    """
    单个连通分量上的深度优先分支定界

    剪枝只去掉不可行的取值，因此返回分量内按声明顺序字典序最小的解。
    """

    def __init__(self, problem: IfdlProblem, budget: int, used: int):
        self.problem = problem
        self.budget = budget
        self.nodes = used
        self.order = list(problem.variables)

        cap = problem.derived_cap()
        self.upper = {x: cap for x in problem.variables}
        self.by_var: Dict[Hashable, List[int]] = {x: [] for x in problem.variables}
        for i, c in enumerate(problem.constraints):
            for x in c.vars:
                self.by_var[x].append(i)
                if c.sense is Sense.LE:
                    self.upper[x] = min(self.upper[x], c.bound)
        self.assigned_sum = [0] * len(problem.constraints)
        self.remaining_upper = [sum(self.upper[x] for x in c.vars) for c in problem.constraints]
        self.values: Dict[Hashable, int] = {}

    def solve(self) -> bool:
        for c in self.problem.constraints:
            if c.sense is Sense.GE and sum(self.upper[x] for x in c.vars) < c.bound:
                return False
        return self._search(0)

    def _search(self, depth: int) -> bool:
        self.nodes += 1
        if self.nodes > self.budget:
            raise ResourceLimitError(f"整数规划搜索超出节点预算 {self.budget}")
        if depth == len(self.order):
            return True
        x = self.order[depth]
        constraints = self.problem.constraints
        low, high = 0, self.upper[x]
        for i in self.by_var[x]:
            c = constraints[i]
            if c.sense is Sense.GE:
                others = self.remaining_upper[i] - self.upper[x]
                low = max(low, c.bound - self.assigned_sum[i] - others)
            else:
                high = min(high, c.bound - self.assigned_sum[i])
        for value in range(low, high + 1):
            self.values[x] = value
            for i in self.by_var[x]:
                self.assigned_sum[i] += value
                self.remaining_upper[i] -= self.upper[x]
            if self._search(depth + 1):
                return True
            for i in self.by_var[x]:
                self.assigned_sum[i] -= value
                self.remaining_upper[i] += self.upper[x]
        self.values.pop(x, None)
        return False


def check_feasibility(problem: IfdlProblem, node_budget: int = DEFAULT_NODE_BUDGET) -> FeasibilityResult:
    """
    判定 IFDL 问题是否可行

    先把 EQ0 约束代入消元，再逐个连通分量做分支定界。

    Args:
        problem: IFDL 问题
        node_budget: 搜索节点预算（所有分量合计）

    Returns:
        FeasibilityResult: 可行时带按变量声明顺序字典序最小的解

    Raises:
        ResourceLimitError: 超出节点预算
    """
    zeros = {c.vars[0] for c in problem.constraints if c.sense is Sense.EQ0}
    reduced: List[IfdlConstraint] = []
    for c in problem.constraints:
        if c.sense is Sense.EQ0:
            continue
        kept = tuple(x for x in c.vars if x not in zeros)
        reduced.append(IfdlConstraint(kept, c.bound, c.sense))
    free = tuple(x for x in problem.variables if x not in zeros)
    presolved = IfdlProblem(free, tuple(reduced))

    witness: Dict[Hashable, int] = {x: 0 for x in problem.variables}
    nodes = 0
    parts = decompose(presolved)
    for part in parts:
        if not part.variables:
            if not all(c.holds({}) for c in part.constraints):
                logger.debug("整数规划不可行: 存在无变量约束无法满足")
                return FeasibilityResult(False, None, nodes, len(parts))
            continue
        search = _BranchAndBound(part, node_budget, nodes)
        feasible = search.solve()
        nodes = search.nodes
        if not feasible:
            logger.debug(f"整数规划不可行: 分量 {len(part.variables)} 个变量, 搜索节点 {nodes}")
            return FeasibilityResult(False, None, nodes, len(parts))
        witness.update(search.values)
    logger.debug(f"整数规划可行: {len(problem.variables)} 个变量, {len(parts)} 个分量, 搜索节点 {nodes}")
    return FeasibilityResult(True, witness, nodes, len(parts))


# ---------------------------------------------------------------------------
# 预言机
# ---------------------------------------------------------------------------

def oracle_enumerate(problem: IfdlProblem, cap: int) -> FeasibilityResult:
    """
    穷举 [0, cap]^|vars| 的全部向量（向量化实现）

    Raises:
        OraclePreconditionError: 网格规模超出限制
    """
    n = len(problem.variables)
    if n == 0:
        return FeasibilityResult(all(c.holds({}) for c in problem.constraints), {})
    if (cap + 1) ** n > ENUMERATION_LIMIT:
        raise OraclePreconditionError(f"穷举规模过大: ({cap}+1)^{n}")
    grid = np.indices((cap + 1,) * n).reshape(n, -1).T
    mask = np.ones(grid.shape[0], dtype=bool)
    index = {x: i for i, x in enumerate(problem.variables)}
    for c in problem.constraints:
        columns = [index[x] for x in c.vars]
        sums = grid[:, columns].sum(axis=1) if columns else np.zeros(grid.shape[0], dtype=np.int64)
        if c.sense is Sense.GE:
            mask &= sums >= c.bound
        elif c.sense is Sense.LE:
            mask &= sums <= c.bound
        else:
            mask &= sums == 0
    hits = np.flatnonzero(mask)
    if hits.size == 0:
        return FeasibilityResult(False)
    row = grid[hits[0]]
    return FeasibilityResult(True, {x: int(row[index[x]]) for x in problem.variables})


def _as_one_sided(problem: IfdlProblem) -> Tuple[List[IfdlConstraint], List[IfdlConstraint]]:
    ge = [c for c in problem.constraints if c.sense is Sense.GE]
    le = [c if c.sense is Sense.LE else IfdlConstraint.le(c.vars, 0)
          for c in problem.constraints if c.sense is not Sense.GE]
    return ge, le


def _distributions(size: int, total: int) -> Iterator[Tuple[int, ...]]:
    """把 total 个单位分配给 size 个变量的全部方式"""
    if size == 0:
        if total == 0:
            yield ()
        return
    for picks in combinations_with_replacement(range(size), total):
        counts = [0] * size
        for j in picks:
            counts[j] += 1
        yield tuple(counts)


def _run_count(constraints: Sequence[IfdlConstraint]) -> int:
    runs = 1
    for c in constraints:
        k = len(c.vars)
        runs *= comb(k + c.bound - 1, c.bound) if k else (1 if c.bound == 0 else 0)
    return runs


def _check_bounds(constraints: Sequence[IfdlConstraint], n: int, what: str) -> None:
    bad = [c for c in constraints if c.bound > n]
    if bad:
        raise OraclePreconditionError(f"{what}右端超过 n={n}: {format_constraint(bad[0])}")


def _check_runs(constraints: Sequence[IfdlConstraint], run_limit: int) -> None:
    runs = _run_count(constraints)
    if runs > run_limit:
        raise OraclePreconditionError(f"可能的运行数 {runs} 超出上限 {run_limit}")


def oracle_lemma1(problem: IfdlProblem, n: Optional[int] = None,
                  run_limit: int = DEFAULT_RUN_LIMIT) -> bool:
    """
    把每个约束的右端 b_i 分配为 c_{i,j}（Σ_j c_{i,j} = b_i）；
    可行当且仅当存在一种分配，使每个变量的 GE 份额最大值不超过 LE 份额最小值

    Args:
        n: 所有右端的上界，缺省取最大右端
        run_limit: 分配组合数的上限

    Raises:
        OraclePreconditionError: 右端超过 n，或组合数超过上限
    """
    ge, le = _as_one_sided(problem)
    all_constraints = le + ge
    if n is None:
        n = max((c.bound for c in all_constraints), default=0)
    _check_bounds(all_constraints, n, "约束")
    # 无变量的 LE 约束总是满足
    active = [c for c in all_constraints if c.vars or c.sense is Sense.GE]
    _check_runs(active, run_limit)

    low: Dict[Hashable, int] = {}
    high: Dict[Hashable, int] = {}

    def search(i: int) -> bool:
        if i == len(active):
            return True
        c = active[i]
        for counts in _distributions(len(c.vars), c.bound):
            saved = [(x, low.get(x), high.get(x)) for x in c.vars]
            ok = True
            for x, share in zip(c.vars, counts):
                if c.sense is Sense.GE:
                    low[x] = max(low.get(x, 0), share)
                else:
                    high[x] = min(high.get(x, share), share)
                if x in high and low.get(x, 0) > high[x]:
                    ok = False
            if ok and search(i + 1):
                return True
            for x, old_low, old_high in saved:
                if old_low is None:
                    low.pop(x, None)
                else:
                    low[x] = old_low
                if old_high is None:
                    high.pop(x, None)
                else:
                    high[x] = old_high
        return False

    return search(0)


def oracle_lemma2(problem: IfdlProblem, n: Optional[int] = None, side: str = "le",
                  run_limit: int = DEFAULT_RUN_LIMIT) -> bool:
    """
    单侧有界的判定过程

    side="le"：分配 LE 右端，d_j 取最小份额，再检查 GE 约束
    （含有不受 LE 约束的变量的 GE 约束总能满足）。
    side="ge"：分配 GE 右端，d_j 取最大份额，其余变量取 0，再检查 LE 约束。

    Raises:
        OraclePreconditionError: 所分配一侧的右端超过 n，或组合数超过上限
    """
    if side not in ("le", "ge"):
        raise ValueError(f"未知的一侧: {side}")
    ge, le = _as_one_sided(problem)
    distributed, checked = (le, ge) if side == "le" else (ge, le)
    if n is None:
        n = max((c.bound for c in distributed), default=0)
    _check_bounds(distributed, n, "LE 约束" if side == "le" else "GE 约束")
    distributed = [c for c in distributed if c.vars or side == "ge"]
    _check_runs(distributed, run_limit)
    touched = {x for c in distributed for x in c.vars}

    shares: Dict[Hashable, int] = {}

    def satisfied() -> bool:
        for c in checked:
            if side == "le":
                if any(x not in touched for x in c.vars):
                    continue
                if sum(shares[x] for x in c.vars) < c.bound:
                    return False
            elif sum(shares.get(x, 0) for x in c.vars) > c.bound:
                return False
        return True

    def search(i: int) -> bool:
        if i == len(distributed):
            return satisfied()
        c = distributed[i]
        for counts in _distributions(len(c.vars), c.bound):
            saved = [(x, shares.get(x)) for x in c.vars]
            for x, share in zip(c.vars, counts):
                if x not in shares:
                    shares[x] = share
                elif side == "le":
                    shares[x] = min(shares[x], share)
                else:
                    shares[x] = max(shares[x], share)
            if search(i + 1):
                return True
            for x, old in saved:
                if old is None:
                    del shares[x]
                else:
                    shares[x] = old
        return False

    return search(0)


# ---------------------------------------------------------------------------
# 调试文本格式
# ---------------------------------------------------------------------------

_LINE_RE = re.compile(r"^\s*(?P<lhs>.+?)\s*(?P<op>>=|<=|=)\s*(?P<rhs>\d+)\s*$")


def format_constraint(c: IfdlConstraint) -> str:
    lhs = " + ".join(str(x) for x in c.vars) if c.vars else "0"
    return f"{lhs} {c.sense.value} {c.bound}"


def format_problem(problem: IfdlProblem) -> str:
    """每行一个约束，首行声明变量"""
    lines = ["vars: " + " ".join(str(x) for x in problem.variables)]
    lines.extend(format_constraint(c) for c in problem.constraints)
    return "\n".join(lines) + "\n"


def parse_problem(text: str) -> IfdlProblem:
    """
    解析调试文本格式，例如::

        vars: x1 x2 x3
        x1 + x3 >= 2
        x2 <= 1
        x1 = 0

    vars 行可省略，此时变量按首次出现顺序收集。
    """
    variables: Dict[str, None] = {}
    constraints: List[IfdlConstraint] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("vars:"):
            variables.update(dict.fromkeys(line[len("vars:"):].split()))
            continue
        match = _LINE_RE.match(line)
        if match is None:
            raise ValueError(f"第{line_no}行无法解析: {raw!r}")
        lhs = match.group("lhs").strip()
        names = [] if lhs == "0" else [name.strip() for name in lhs.split("+")]
        if any(not name for name in names):
            raise ValueError(f"第{line_no}行变量为空: {raw!r}")
        variables.update(dict.fromkeys(names))
        bound = int(match.group("rhs"))
        op = match.group("op")
        if op == ">=":
            constraints.append(IfdlConstraint.ge(names, bound))
        elif op == "<=":
            constraints.append(IfdlConstraint.le(names, bound))
        else:
            if bound != 0 or len(names) != 1:
                raise ValueError(f"第{line_no}行: 等式只支持 x = 0")
            constraints.append(IfdlConstraint.zero(names[0]))
    return IfdlProblem(tuple(variables), tuple(constraints))
