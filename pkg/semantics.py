#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
语义模块
解释的表示与文本格式、概念求值、模型检查，
以及基于 SAT 编码的有界模型搜索（差分测试用的预言机）
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from pysat.card import CardEnc, EncType
from pysat.formula import CNF, IDPool
from pysat.solvers import Solver

from kb_parser import KnowledgeBase
from logic_core import (
    And, AtLeast, AtMost, Atomic, Bot, Concept, Eq, Exists, Forall, Individual,
    Instance, INTERNAL_FORMS, InternalConceptError, NegAtomic, NegNominal,
    NegRoleAssertion, Nominal, Not, NotEq, Or, OraclePreconditionError,
    ReasonerError, Role, RoleAssertion, Top, concept_key, negate_nnf,
    show_concept, show_formula, subconcepts,
)

logger = logging.getLogger(__name__)

Element = str
Pair = Tuple[Element, Element]

# 有界模型搜索允许的最大论域
MAX_ORACLE_DOMAIN = 6
# 编码规模上限（子概念数 × 论域大小的平方）
MAX_ENCODING_WEIGHT = 200_000
SAT_SOLVER = "g3"


def element_key(x: Element) -> tuple:
    """命名元素在前，匿名元素 _k 按编号排序"""
    if x.startswith("_") and x[1:].isdigit():
        return (1, int(x[1:]), x)
    return (0, 0, x)


def sorted_elements(elements: Iterable[Element]) -> List[Element]:
    return sorted(elements, key=element_key)


@dataclass
class Interpretation:
    """
    有限解释 I = ⟨Δ, ·^I⟩

    Attributes:
        delta: 论域
        concept_names: 概念名的外延
        roles: 角色的外延
        individuals: 个体到元素的映射
    """
    delta: Tuple[Element, ...]
    concept_names: Dict[str, FrozenSet[Element]] = field(default_factory=dict)
    roles: Dict[Role, FrozenSet[Pair]] = field(default_factory=dict)
    individuals: Dict[Individual, Element] = field(default_factory=dict)

    def extension(self, name: str) -> FrozenSet[Element]:
        return self.concept_names.get(name, frozenset())

    def role(self, r: Role) -> FrozenSet[Pair]:
        return self.roles.get(r, frozenset())


@dataclass(frozen=True)
class ModelCheck:
    ok: bool
    violation: Optional[str] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class BoundedSearchResult:
    """brute_force_sat 的结果：找到的模型，或在 max_domain 以内无模型"""
    model: Optional[Interpretation]
    max_domain: int

    def __bool__(self) -> bool:
        return self.model is not None


# ---------------------------------------------------------------------------
# 概念求值
# ---------------------------------------------------------------------------

class _Evaluator:
    """带缓存的递归求值器"""

    def __init__(self, interpretation: Interpretation):
        self.i = interpretation
        self.delta = frozenset(interpretation.delta)
        self._cache: Dict[Concept, FrozenSet[Element]] = {}
        self._succ: Dict[Role, Dict[Element, Set[Element]]] = {}

    def successors(self, r: Role, x: Element) -> Set[Element]:
        table = self._succ.get(r)
        if table is None:
            table = {}
            for a, b in self.i.role(r):
                table.setdefault(a, set()).add(b)
            self._succ[r] = table
        return table.get(x, set())

    def count(self, r: Role, x: Element, filler: FrozenSet[Element]) -> int:
        return len(self.successors(r, x) & filler)

    def eval(self, c: Concept) -> FrozenSet[Element]:
        cached = self._cache.get(c)
        if cached is None:
            cached = self._eval(c)
            self._cache[c] = cached
        return cached

    def _eval(self, c: Concept) -> FrozenSet[Element]:
        if isinstance(c, INTERNAL_FORMS):
            raise InternalConceptError(f"内部形式不能求值: {show_concept(c)}")
        if isinstance(c, Top):
            return self.delta
        if isinstance(c, Bot):
            return frozenset()
        if isinstance(c, Atomic):
            return self.i.extension(c.name) & self.delta
        if isinstance(c, NegAtomic):
            return self.delta - self.i.extension(c.name)
        if isinstance(c, Nominal):
            x = self.i.individuals.get(c.individual)
            return frozenset({x}) if x is not None else frozenset()
        if isinstance(c, NegNominal):
            x = self.i.individuals.get(c.individual)
            return self.delta - {x}
        if isinstance(c, Not):
            return self.delta - self.eval(c.operand)
        if isinstance(c, And):
            return self.eval(c.left) & self.eval(c.right)
        if isinstance(c, Or):
            return self.eval(c.left) | self.eval(c.right)
        filler = self.eval(c.filler)
        if isinstance(c, Exists):
            return frozenset(x for x in self.delta if self.count(c.role, x, filler) >= 1)
        if isinstance(c, Forall):
            return frozenset(x for x in self.delta if self.successors(c.role, x) <= filler)
        if isinstance(c, AtLeast):
            return frozenset(x for x in self.delta if self.count(c.role, x, filler) >= c.n)
        if isinstance(c, AtMost):
            return frozenset(x for x in self.delta if self.count(c.role, x, filler) <= c.n)
        raise ReasonerError(f"未知概念: {c!r}")


def eval_concept(c: Concept, interpretation: Interpretation) -> FrozenSet[Element]:
    """
    计算概念的外延 C^I

    Raises:
        InternalConceptError: 概念含有 ⪯/⪰
    """
    return _Evaluator(interpretation).eval(c)


def check_model(interpretation: Interpretation, kb: KnowledgeBase) -> ModelCheck:
    """
    检查解释是否为知识库的模型

    依次检查个体映射、RBox、TBox、ABox，返回第一个违反项。
    """
    i = interpretation
    delta = frozenset(i.delta)
    if not delta:
        return ModelCheck(False, "论域为空")
    for a in kb.individuals:
        if i.individuals.get(a) not in delta:
            return ModelCheck(False, f"个体 {a} 未映射到论域")

    for r, s in sorted(kb.rbox.subrole):
        if r != s and not i.role(r) <= i.role(s):
            return ModelCheck(False, f"RBox: {r} ⊑ {s}")
    for r in sorted(kb.rbox.transitive):
        edges = i.role(r)
        succ: Dict[Element, Set[Element]] = {}
        for x, y in edges:
            succ.setdefault(x, set()).add(y)
        for x, y in edges:
            for z in succ.get(y, ()):
                if (x, z) not in edges:
                    return ModelCheck(False, f"RBox: Trans({r}) 缺少 ({x},{z})")

    evaluator = _Evaluator(i)
    for c in sorted(kb.tbox, key=concept_key):
        missing = delta - evaluator.eval(c)
        if missing:
            x = sorted_elements(missing)[0]
            return ModelCheck(False, f"TBox: {show_concept(c)} 在 {x} 处不成立")

    for f in kb.abox:
        if not _assertion_holds(f, i, evaluator):
            return ModelCheck(False, f"ABox: {show_formula(f)}")
    return ModelCheck(True)


def _assertion_holds(f, i: Interpretation, evaluator: _Evaluator) -> bool:
    ind = i.individuals
    if isinstance(f, Instance):
        return ind[f.individual] in evaluator.eval(f.concept)
    if isinstance(f, RoleAssertion):
        return (ind[f.source], ind[f.target]) in i.role(f.role)
    if isinstance(f, NegRoleAssertion):
        return (ind[f.source], ind[f.target]) not in i.role(f.role)
    if isinstance(f, Eq):
        return ind[f.left] == ind[f.right]
    if isinstance(f, NotEq):
        return ind[f.left] != ind[f.right]
    if isinstance(f, Concept):
        return evaluator.eval(f) == evaluator.delta
    raise ReasonerError(f"未知断言: {f!r}")


# ---------------------------------------------------------------------------
# 文本格式
# ---------------------------------------------------------------------------

def format_model(interpretation: Interpretation) -> str:
    """
    稳定的模型文本格式::

        domain: a b _1 _2
        individuals: a=a b=b
        concept A: _2
        role r: a->b a->_1
    """
    i = interpretation
    lines = ["domain: " + " ".join(sorted_elements(i.delta))]
    lines.append("individuals: " + " ".join(f"{a}={x}" for a, x in sorted(i.individuals.items())))
    for name in sorted(i.concept_names):
        members = " ".join(sorted_elements(i.concept_names[name]))
        lines.append(f"concept {name}: {members}".rstrip())
    for r in sorted(i.roles):
        pairs = sorted(i.roles[r], key=lambda p: (element_key(p[0]), element_key(p[1])))
        lines.append((f"role {r}: " + " ".join(f"{x}->{y}" for x, y in pairs)).rstrip())
    return "\n".join(lines) + "\n"


def parse_model_text(text: str) -> Interpretation:
    """
    读取 format_model 的输出

    Raises:
        ReasonerError: 格式错误（带行号）
    """
    delta: Optional[Tuple[Element, ...]] = None
    individuals: Dict[Individual, Element] = {}
    concepts: Dict[str, FrozenSet[Element]] = {}
    roles: Dict[Role, FrozenSet[Pair]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, body = line.partition(":")
        if not sep:
            raise ReasonerError(f"模型文件第{line_no}行: 缺少 ':'")
        items = body.split()
        words = head.split()
        if words == ["domain"]:
            delta = tuple(items)
        elif words == ["individuals"]:
            for item in items:
                a, eq, x = item.partition("=")
                if not eq or not a or not x:
                    raise ReasonerError(f"模型文件第{line_no}行: 无效的个体映射 '{item}'")
                individuals[a] = x
        elif len(words) == 2 and words[0] == "concept":
            concepts[words[1]] = frozenset(items)
        elif len(words) == 2 and words[0] == "role":
            pairs = set()
            for item in items:
                x, arrow, y = item.partition("->")
                if not arrow or not x or not y:
                    raise ReasonerError(f"模型文件第{line_no}行: 无效的角色边 '{item}'")
                pairs.add((x, y))
            roles[words[1]] = frozenset(pairs)
        else:
            raise ReasonerError(f"模型文件第{line_no}行: 无法识别 '{head}'")
    if delta is None:
        raise ReasonerError("模型文件缺少 domain 行")
    known = set(delta)
    used = set(individuals.values())
    used.update(x for members in concepts.values() for x in members)
    used.update(x for pairs in roles.values() for p in pairs for x in p)
    if not used <= known:
        raise ReasonerError(f"模型文件引用了论域之外的元素: {sorted_elements(used - known)}")
    return Interpretation(delta, concepts, roles, individuals)


# ---------------------------------------------------------------------------
# 有界模型搜索
# ---------------------------------------------------------------------------

class _ModelEncoder:
    """
    "存在论域大小为 k 的模型" 的命题编码

    概念均为 NNF，故只需单向 Tseitin：lit(C, x) 为真蕴含 x ∈ C^I。
    """

    def __init__(self, kb: KnowledgeBase, size: int):
        self.kb = kb
        self.size = size
        self.pool = IDPool()
        self.cnf = CNF()
        self._lits: Dict[Tuple[Concept, int], int] = {}
        self.roles = sorted(kb.roles)
        self.names = sorted({c.name for c in self._all_concepts() if isinstance(c, (Atomic, NegAtomic))})
        self.elements = range(size)
        # 固定编号：先分配全部角色与概念名变量，解码时直接查询
        for r in self.roles:
            for x in self.elements:
                for y in self.elements:
                    self.role(r, x, y)
        for name in self.names:
            for x in self.elements:
                self.name(name, x)

    def _all_concepts(self) -> Set[Concept]:
        result: Set[Concept] = set()
        for c in self.kb.concepts():
            result.update(subconcepts(c))
            result.update(subconcepts(negate_nnf(c)))
        return result

    def ind(self, a: Individual, x: int) -> int:
        return self.pool.id(("ind", a, x))

    def role(self, r: Role, x: int, y: int) -> int:
        return self.pool.id(("role", r, x, y))

    def name(self, name: str, x: int) -> int:
        return self.pool.id(("name", name, x))

    def _add_conditional(self, guard: int, clauses: Iterable[List[int]]) -> None:
        for clause in clauses:
            self.cnf.append([-guard] + list(clause))

    def lit(self, c: Concept, x: int) -> int:
        key = (c, x)
        found = self._lits.get(key)
        if found is None:
            found = self._encode(c, x)
            self._lits[key] = found
        return found

    def _encode(self, c: Concept, x: int) -> int:
        if isinstance(c, INTERNAL_FORMS):
            raise InternalConceptError(f"内部形式不能编码: {show_concept(c)}")
        if isinstance(c, Not):
            c = negate_nnf(c.operand)
        if isinstance(c, Atomic):
            return self.name(c.name, x)
        if isinstance(c, NegAtomic):
            return -self.name(c.name, x)
        g = self.pool.id(("conc", c, x))
        if isinstance(c, Top):
            self.cnf.append([g])
        elif isinstance(c, Bot):
            self.cnf.append([-g])
        elif isinstance(c, Nominal):
            self.cnf.append([-g, self.ind(c.individual, x)])
        elif isinstance(c, NegNominal):
            self.cnf.append([-g, -self.ind(c.individual, x)])
        elif isinstance(c, And):
            self.cnf.append([-g, self.lit(c.left, x)])
            self.cnf.append([-g, self.lit(c.right, x)])
        elif isinstance(c, Or):
            self.cnf.append([-g, self.lit(c.left, x), self.lit(c.right, x)])
        elif isinstance(c, Forall):
            for y in self.elements:
                self.cnf.append([-g, -self.role(c.role, x, y), self.lit(c.filler, y)])
        elif isinstance(c, (Exists, AtLeast)):
            n = 1 if isinstance(c, Exists) else c.n
            self._encode_at_least(g, c, n, x)
        elif isinstance(c, AtMost):
            self._encode_at_most(g, c, x)
        else:
            raise ReasonerError(f"未知概念: {c!r}")
        return g

    def _encode_at_least(self, g: int, c: Concept, n: int, x: int) -> None:
        if n <= 0:
            return
        if n > self.size:
            self.cnf.append([-g])
            return
        chosen = []
        for y in self.elements:
            s = self.pool.id(("succ", c, x, y))
            self.cnf.append([-s, self.role(c.role, x, y)])
            self.cnf.append([-s, self.lit(c.filler, y)])
            chosen.append(s)
        if n == 1:
            self._add_conditional(g, [chosen])
        elif n == self.size:
            self._add_conditional(g, [[s] for s in chosen])
        else:
            card = CardEnc.atleast(lits=chosen, bound=n, vpool=self.pool, encoding=EncType.seqcounter)
            self._add_conditional(g, card.clauses)

    def _encode_at_most(self, g: int, c: AtMost, x: int) -> None:
        if c.n >= self.size:
            return
        complement = negate_nnf(c.filler)
        counted = []
        for y in self.elements:
            t = self.pool.id(("cnt", c, x, y))
            self.cnf.append([-g, -self.role(c.role, x, y), self.lit(complement, y), t])
            counted.append(t)
        if c.n == 0:
            for t in counted:
                self.cnf.append([-g, -t])
            return
        card = CardEnc.atmost(lits=counted, bound=c.n, vpool=self.pool, encoding=EncType.seqcounter)
        self._add_conditional(g, card.clauses)

    def encode(self) -> CNF:
        kb = self.kb
        for a in kb.individuals:
            lits = [self.ind(a, x) for x in self.elements]
            self.cnf.append(lits)
            if len(lits) > 1:
                card = CardEnc.atmost(lits=lits, bound=1, vpool=self.pool, encoding=EncType.pairwise)
                self.cnf.extend(card.clauses)
        for r, s in sorted(kb.rbox.subrole):
            if r == s:
                continue
            for x in self.elements:
                for y in self.elements:
                    self.cnf.append([-self.role(r, x, y), self.role(s, x, y)])
        for r in sorted(kb.rbox.transitive):
            for x in self.elements:
                for y in self.elements:
                    for z in self.elements:
                        self.cnf.append([-self.role(r, x, y), -self.role(r, y, z), self.role(r, x, z)])
        for c in sorted(kb.tbox, key=concept_key):
            for x in self.elements:
                self.cnf.append([self.lit(c, x)])
        for f in kb.abox:
            self._encode_assertion(f)
        return self.cnf

    def _encode_assertion(self, f) -> None:
        xs = self.elements
        if isinstance(f, Instance):
            for x in xs:
                self.cnf.append([-self.ind(f.individual, x), self.lit(f.concept, x)])
        elif isinstance(f, (RoleAssertion, NegRoleAssertion)):
            sign = 1 if isinstance(f, RoleAssertion) else -1
            for x in xs:
                for y in xs:
                    self.cnf.append([-self.ind(f.source, x), -self.ind(f.target, y),
                                     sign * self.role(f.role, x, y)])
        elif isinstance(f, Eq):
            for x in xs:
                self.cnf.append([-self.ind(f.left, x), self.ind(f.right, x)])
        elif isinstance(f, NotEq):
            for x in xs:
                self.cnf.append([-self.ind(f.left, x), -self.ind(f.right, x)])
        elif isinstance(f, Concept):
            for x in xs:
                self.cnf.append([self.lit(f, x)])
        else:
            raise ReasonerError(f"未知断言: {f!r}")

    def decode(self, model: Iterable[int]) -> Interpretation:
        true = {v for v in model if v > 0}
        elements = [f"_{x + 1}" for x in self.elements]
        individuals = {}
        for a in self.kb.individuals:
            for x in self.elements:
                if self.ind(a, x) in true:
                    individuals[a] = elements[x]
                    break
        concept_names = {
            name: frozenset(elements[x] for x in self.elements if self.name(name, x) in true)
            for name in self.names
        }
        roles = {
            r: frozenset((elements[x], elements[y]) for x in self.elements for y in self.elements
                         if self.role(r, x, y) in true)
            for r in self.roles
        }
        return Interpretation(tuple(elements), concept_names, roles, individuals)


def brute_force_sat(kb: KnowledgeBase, max_domain: int = 3) -> BoundedSearchResult:
    """
    在论域大小 1..max_domain 内搜索知识库的模型

    每个论域大小编码为一个 CNF 交给 SAT 求解器，等价于穷举全部解释；
    找到的解会被解码并由 check_model 复核。

    Args:
        kb: 知识库
        max_domain: 最大论域

    Returns:
        BoundedSearchResult: 第一个找到的模型，或 None

    Raises:
        OraclePreconditionError: 论域或编码规模超出上限
    """
    if not 1 <= max_domain <= MAX_ORACLE_DOMAIN:
        raise OraclePreconditionError(f"max_domain 必须在 1..{MAX_ORACLE_DOMAIN} 之间: {max_domain}")
    weight = sum(sum(1 for _ in subconcepts(c)) for c in kb.concepts()) * max_domain ** 2
    if weight > MAX_ENCODING_WEIGHT:
        raise OraclePreconditionError(f"知识库过大，编码规模 {weight} 超出上限 {MAX_ENCODING_WEIGHT}")

    for size in range(1, max_domain + 1):
        encoder = _ModelEncoder(kb, size)
        cnf = encoder.encode()
        with Solver(name=SAT_SOLVER, bootstrap_with=cnf.clauses) as solver:
            found = solver.solve()
            model = solver.get_model() if found else None
        logger.debug(f"有界模型搜索: 论域 {size}, {len(cnf.clauses)} 个子句, "
                     f"{'可满足' if found else '不可满足'}")
        if model is None:
            continue
        interpretation = encoder.decode(model)
        verdict = check_model(interpretation, kb)
        if not verdict:
            raise ReasonerError(f"有界模型搜索的解码结果未通过模型检查: {verdict.violation}")
        return BoundedSearchResult(interpretation, max_domain)
    return BoundedSearchResult(None, max_domain)
