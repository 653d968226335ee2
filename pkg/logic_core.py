#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
描述逻辑核心模块
定义SHOQ概念与公式的抽象语法、NNF变换、规范排序、正出现分析、
≤1 r.{a} 相关性判定以及闭包集合的计算与检查
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import (TYPE_CHECKING, Dict, FrozenSet, Iterable, Iterator, List,
                    Mapping, Optional, Set, Tuple, Union)

if TYPE_CHECKING:
    from kb_parser import KnowledgeBase

logger = logging.getLogger(__name__)

# 角色名与个体名均为驻留字符串
Role = str
Individual = str


# ---------------------------------------------------------------------------
# 异常体系
# ---------------------------------------------------------------------------

class ReasonerError(Exception):
    """推理器异常基类"""


class KBSyntaxError(ReasonerError):
    """知识库文本语法错误（带行列号）"""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"第{line}行第{column}列: {message}")
        self.line = line
        self.column = column


class KBValidationError(ReasonerError):
    """知识库校验失败"""


class InternalConceptError(ReasonerError):
    """内部形式 ⪯/⪰ 出现在不允许的位置"""


class ResourceLimitError(ReasonerError):
    """超出整数规划节点预算或推理步数上限"""


class OraclePreconditionError(ReasonerError):
    """测试预言机的前置条件不满足"""


class TableauDefectError(ReasonerError):
    """表格图不变式被破坏（实现缺陷）"""


class ExtractionError(ReasonerError):
    """模型抽取失败（实现缺陷）"""


# ---------------------------------------------------------------------------
# 概念
# ---------------------------------------------------------------------------

class Concept:
    """概念基类，所有变体都是不可变值对象"""

    __slots__ = ()

    def __str__(self) -> str:
        return show_concept(self)


@dataclass(frozen=True)
class Top(Concept):
    pass


@dataclass(frozen=True)
class Bot(Concept):
    pass


@dataclass(frozen=True)
class Atomic(Concept):
    name: str


@dataclass(frozen=True)
class NegAtomic(Concept):
    name: str


@dataclass(frozen=True)
class And(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Or(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Exists(Concept):
    role: Role
    filler: Concept


@dataclass(frozen=True)
class Forall(Concept):
    role: Role
    filler: Concept


@dataclass(frozen=True)
class Nominal(Concept):
    individual: Individual


@dataclass(frozen=True)
class NegNominal(Concept):
    individual: Individual


@dataclass(frozen=True)
class AtLeast(Concept):
    n: int
    role: Role
    filler: Concept


@dataclass(frozen=True)
class AtMost(Concept):
    n: int
    role: Role
    filler: Concept


@dataclass(frozen=True)
class PrecEq(Concept):
    """⪯n s.C：不计已命名个体的剩余上界（仅出现在状态标签中）"""
    n: int
    role: Role
    filler: Concept


@dataclass(frozen=True)
class SuccEq(Concept):
    """⪰n s.C：不计已命名个体的剩余下界（仅出现在状态标签中）"""
    n: int
    role: Role
    filler: Concept


@dataclass(frozen=True)
class Not(Concept):
    """解析器产生的一般否定，nnf() 之后不再出现"""
    operand: Concept


TOP = Top()
BOT = Bot()

NUMBER_RESTRICTIONS = (AtLeast, AtMost, PrecEq, SuccEq)
INTERNAL_FORMS = (PrecEq, SuccEq)


# ---------------------------------------------------------------------------
# 公式（概念本身即 null:C）
# ---------------------------------------------------------------------------

class Assertion:
    """eABox 断言基类"""

    __slots__ = ()

    def __str__(self) -> str:
        return show_formula(self)


@dataclass(frozen=True)
class Instance(Assertion):
    individual: Individual
    concept: Concept


@dataclass(frozen=True)
class RoleAssertion(Assertion):
    role: Role
    source: Individual
    target: Individual


@dataclass(frozen=True)
class NegRoleAssertion(Assertion):
    role: Role
    source: Individual
    target: Individual


@dataclass(frozen=True)
class Eq(Assertion):
    left: Individual
    right: Individual


@dataclass(frozen=True)
class NotEq(Assertion):
    left: Individual
    right: Individual


Formula = Union[Concept, Assertion]
Label = FrozenSet[Formula]


# ---------------------------------------------------------------------------
# RBox 闭包（由 kb_parser.build_rbox_closure 构造）
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RBoxClosure:
    """
    ext(R)：自反传递的子角色关系以及传递角色集合

    Attributes:
        subrole: 所有 (r, s) 满足 r ⊑ s
        transitive: 传递角色
        roles: KB 中提及的全部角色
    """
    subrole: FrozenSet[Tuple[Role, Role]]
    transitive: FrozenSet[Role]
    roles: FrozenSet[Role]
    _supers: Dict[Role, FrozenSet[Role]] = field(default_factory=dict, compare=False, repr=False)
    _subs: Dict[Role, FrozenSet[Role]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        supers: Dict[Role, Set[Role]] = {r: {r} for r in self.roles}
        subs: Dict[Role, Set[Role]] = {r: {r} for r in self.roles}
        for r, s in self.subrole:
            supers.setdefault(r, {r}).add(s)
            subs.setdefault(s, {s}).add(r)
        self._supers.update({r: frozenset(v) for r, v in supers.items()})
        self._subs.update({r: frozenset(v) for r, v in subs.items()})

    def is_subrole(self, r: Role, s: Role) -> bool:
        return r == s or (r, s) in self.subrole

    def supers(self, r: Role) -> FrozenSet[Role]:
        """所有 s 满足 r ⊑ s（未知角色只返回自身）"""
        return self._supers.get(r, frozenset([r]))

    def subroles(self, s: Role) -> FrozenSet[Role]:
        return self._subs.get(s, frozenset([s]))

    def is_transitive(self, r: Role) -> bool:
        return r in self.transitive

    def is_simple(self, r: Role) -> bool:
        return not any(s in self.transitive for s in self.subroles(r))


EMPTY_RBOX = RBoxClosure(frozenset(), frozenset(), frozenset())


# ---------------------------------------------------------------------------
# 显示
# ---------------------------------------------------------------------------

def show_concept(c: Concept) -> str:
    """以数学记号显示概念（用于跟踪、DOT 与日志）"""
    if isinstance(c, Top):
        return "⊤"
    if isinstance(c, Bot):
        return "⊥"
    if isinstance(c, Atomic):
        return c.name
    if isinstance(c, NegAtomic):
        return f"¬{c.name}"
    if isinstance(c, And):
        return f"({show_concept(c.left)} ⊓ {show_concept(c.right)})"
    if isinstance(c, Or):
        return f"({show_concept(c.left)} ⊔ {show_concept(c.right)})"
    if isinstance(c, Exists):
        return f"∃{c.role}.{show_concept(c.filler)}"
    if isinstance(c, Forall):
        return f"∀{c.role}.{show_concept(c.filler)}"
    if isinstance(c, Nominal):
        return f"{{{c.individual}}}"
    if isinstance(c, NegNominal):
        return f"¬{{{c.individual}}}"
    if isinstance(c, NUMBER_RESTRICTIONS):
        sign = {AtLeast: "≥", AtMost: "≤", PrecEq: "⪯", SuccEq: "⪰"}[type(c)]
        return f"{sign}{c.n} {c.role}.{show_concept(c.filler)}"
    if isinstance(c, Not):
        return f"¬{show_concept(c.operand)}"
    raise TypeError(f"未知概念类型: {c!r}")


def show_formula(f: Formula) -> str:
    if isinstance(f, Concept):
        return show_concept(f)
    if isinstance(f, Instance):
        return f"{f.individual}:{show_concept(f.concept)}"
    if isinstance(f, RoleAssertion):
        return f"{f.role}({f.source},{f.target})"
    if isinstance(f, NegRoleAssertion):
        return f"¬{f.role}({f.source},{f.target})"
    if isinstance(f, Eq):
        return f"{f.left}≐{f.right}"
    if isinstance(f, NotEq):
        return f"{f.left}≢{f.right}"
    raise TypeError(f"未知公式类型: {f!r}")


# ---------------------------------------------------------------------------
# 规范排序
# ---------------------------------------------------------------------------

_CONCEPT_RANK = {
    Top: 0, Bot: 1, Atomic: 2, NegAtomic: 3, Nominal: 4, NegNominal: 5,
    And: 6, Or: 7, Exists: 8, Forall: 9, AtLeast: 10, AtMost: 11,
    PrecEq: 12, SuccEq: 13, Not: 14,
}


@lru_cache(maxsize=None)
def concept_key(c: Concept) -> tuple:
    """概念的结构全序键"""
    rank = _CONCEPT_RANK[type(c)]
    if isinstance(c, (Top, Bot)):
        return (rank,)
    if isinstance(c, (Atomic, NegAtomic)):
        return (rank, c.name)
    if isinstance(c, (Nominal, NegNominal)):
        return (rank, c.individual)
    if isinstance(c, (And, Or)):
        return (rank, concept_key(c.left), concept_key(c.right))
    if isinstance(c, (Exists, Forall)):
        return (rank, c.role, concept_key(c.filler))
    if isinstance(c, NUMBER_RESTRICTIONS):
        return (rank, c.n, c.role, concept_key(c.filler))
    return (rank, concept_key(c.operand))


@lru_cache(maxsize=None)
def formula_key(f: Formula) -> tuple:
    """公式的结构全序键：先概念，再按断言种类"""
    if isinstance(f, Concept):
        return (0, concept_key(f))
    if isinstance(f, Instance):
        return (1, f.individual, concept_key(f.concept))
    if isinstance(f, RoleAssertion):
        return (2, f.role, f.source, f.target)
    if isinstance(f, NegRoleAssertion):
        return (3, f.role, f.source, f.target)
    if isinstance(f, Eq):
        return (4, f.left, f.right)
    return (5, f.left, f.right)


def canonical(formulas: Iterable[Formula]) -> List[Formula]:
    """按规范全序排列（标签迭代一律经由此函数，保证确定性）"""
    return sorted(set(formulas), key=formula_key)


def show_label(formulas: Iterable[Formula]) -> str:
    return "{" + ", ".join(show_formula(f) for f in canonical(formulas)) + "}"


# ---------------------------------------------------------------------------
# NNF 与否定
# ---------------------------------------------------------------------------

def nnf(c: Concept) -> Concept:
    """
    转换为否定范式（否定只直接出现在原子概念与名义之前）

    Args:
        c: 可能带一般否定 Not 的概念

    Returns:
        Concept: 等价的 NNF 概念，对 NNF 输入保持不变
    """
    if isinstance(c, Not):
        return _nnf_of_negation(c.operand)
    if isinstance(c, And):
        return And(nnf(c.left), nnf(c.right))
    if isinstance(c, Or):
        return Or(nnf(c.left), nnf(c.right))
    if isinstance(c, Exists):
        return Exists(c.role, nnf(c.filler))
    if isinstance(c, Forall):
        return Forall(c.role, nnf(c.filler))
    if isinstance(c, NUMBER_RESTRICTIONS):
        return type(c)(c.n, c.role, nnf(c.filler))
    return c


def _nnf_of_negation(c: Concept) -> Concept:
    if isinstance(c, Top):
        return BOT
    if isinstance(c, Bot):
        return TOP
    if isinstance(c, Atomic):
        return NegAtomic(c.name)
    if isinstance(c, NegAtomic):
        return Atomic(c.name)
    if isinstance(c, Nominal):
        return NegNominal(c.individual)
    if isinstance(c, NegNominal):
        return Nominal(c.individual)
    if isinstance(c, Not):
        return nnf(c.operand)
    if isinstance(c, And):
        return Or(_nnf_of_negation(c.left), _nnf_of_negation(c.right))
    if isinstance(c, Or):
        return And(_nnf_of_negation(c.left), _nnf_of_negation(c.right))
    if isinstance(c, Exists):
        return Forall(c.role, _nnf_of_negation(c.filler))
    if isinstance(c, Forall):
        return Exists(c.role, _nnf_of_negation(c.filler))
    if isinstance(c, AtLeast):
        # ¬(≥0 r.C) 恒假
        if c.n == 0:
            return BOT
        return AtMost(c.n - 1, c.role, nnf(c.filler))
    if isinstance(c, AtMost):
        return AtLeast(c.n + 1, c.role, nnf(c.filler))
    raise InternalConceptError(f"内部形式没有否定: {show_concept(c)}")


@lru_cache(maxsize=None)
def negate_nnf(c: Concept) -> Concept:
    """C̄：¬C 的 NNF；拒绝 ⪯/⪰ 形式"""
    if contains_internal(c):
        raise InternalConceptError(f"内部形式没有否定: {show_concept(c)}")
    return _nnf_of_negation(c)


def negate_formula(f: Formula) -> Formula:
    """φ̄：a:C ↦ a:C̄，null:C ↦ C̄"""
    if isinstance(f, Instance):
        return Instance(f.individual, negate_nnf(f.concept))
    if isinstance(f, Concept):
        return negate_nnf(f)
    raise TypeError(f"只有 a:C 形式的公式可以取否定: {show_formula(f)}")


def is_nnf(c: Concept) -> bool:
    if isinstance(c, Not):
        return False
    return all(is_nnf(sub) for sub in _children(c))


def contains_internal(c: Concept) -> bool:
    return any(isinstance(sub, INTERNAL_FORMS) for sub in subconcepts(c))


# ---------------------------------------------------------------------------
# 子概念、大小、个体与角色
# ---------------------------------------------------------------------------

def _children(c: Concept) -> Tuple[Concept, ...]:
    if isinstance(c, (And, Or)):
        return (c.left, c.right)
    if isinstance(c, (Exists, Forall)) or isinstance(c, NUMBER_RESTRICTIONS):
        return (c.filler,)
    if isinstance(c, Not):
        return (c.operand,)
    return ()


def subconcepts(c: Concept) -> Iterator[Concept]:
    """前序遍历全部子概念（含自身）"""
    yield c
    for child in _children(c):
        yield from subconcepts(child)


def concept_size(c: Concept) -> int:
    return sum(1 for _ in subconcepts(c))


def formula_concept(f: Formula) -> Optional[Concept]:
    if isinstance(f, Concept):
        return f
    if isinstance(f, Instance):
        return f.concept
    return None


def concept_individuals(c: Concept) -> Set[Individual]:
    return {sub.individual for sub in subconcepts(c)
            if isinstance(sub, (Nominal, NegNominal))}


def concept_roles(c: Concept) -> Set[Role]:
    return {sub.role for sub in subconcepts(c)
            if isinstance(sub, (Exists, Forall)) or isinstance(sub, NUMBER_RESTRICTIONS)}


def formula_individuals(f: Formula) -> List[Individual]:
    """按出现顺序列出公式中的个体（含名义中的个体）"""
    if isinstance(f, Concept):
        head: List[Individual] = []
        concept = f
    elif isinstance(f, Instance):
        head = [f.individual]
        concept = f.concept
    elif isinstance(f, (RoleAssertion, NegRoleAssertion)):
        return [f.source, f.target]
    else:
        return [f.left, f.right]
    for sub in subconcepts(concept):
        if isinstance(sub, (Nominal, NegNominal)):
            head.append(sub.individual)
    return head


def label_individuals(label: Iterable[Formula]) -> Set[Individual]:
    result: Set[Individual] = set()
    for f in label:
        result.update(formula_individuals(f))
    return result


# ---------------------------------------------------------------------------
# 个体替换
# ---------------------------------------------------------------------------

def substitute_concept(c: Concept, mapping: Mapping[Individual, Individual]) -> Concept:
    """把名义中的个体按 mapping 替换"""
    if isinstance(c, Nominal):
        return Nominal(mapping.get(c.individual, c.individual))
    if isinstance(c, NegNominal):
        return NegNominal(mapping.get(c.individual, c.individual))
    if isinstance(c, And):
        return And(substitute_concept(c.left, mapping), substitute_concept(c.right, mapping))
    if isinstance(c, Or):
        return Or(substitute_concept(c.left, mapping), substitute_concept(c.right, mapping))
    if isinstance(c, Exists):
        return Exists(c.role, substitute_concept(c.filler, mapping))
    if isinstance(c, Forall):
        return Forall(c.role, substitute_concept(c.filler, mapping))
    if isinstance(c, NUMBER_RESTRICTIONS):
        return type(c)(c.n, c.role, substitute_concept(c.filler, mapping))
    if isinstance(c, Not):
        return Not(substitute_concept(c.operand, mapping))
    return c


def substitute_formula(f: Formula, mapping: Mapping[Individual, Individual],
                       keep_equalities: bool = False) -> Formula:
    """
    替换公式中的个体

    Args:
        f: 公式
        mapping: 个体映射，未出现的个体保持不变
        keep_equalities: 为 True 时 ≐ 断言保持原样
    """
    def m(x: Individual) -> Individual:
        return mapping.get(x, x)

    if isinstance(f, Concept):
        return substitute_concept(f, mapping)
    if isinstance(f, Instance):
        return Instance(m(f.individual), substitute_concept(f.concept, mapping))
    if isinstance(f, RoleAssertion):
        return RoleAssertion(f.role, m(f.source), m(f.target))
    if isinstance(f, NegRoleAssertion):
        return NegRoleAssertion(f.role, m(f.source), m(f.target))
    if isinstance(f, Eq):
        return f if keep_equalities else Eq(m(f.left), m(f.right))
    return NotEq(m(f.left), m(f.right))


# ---------------------------------------------------------------------------
# 模态深度 0 的正出现
# ---------------------------------------------------------------------------

def depth0_positive(c: Concept) -> Iterator[Concept]:
    """只穿过 ⊓/⊔ 可达的子概念（含自身）"""
    yield c
    if isinstance(c, (And, Or)):
        yield from depth0_positive(c.left)
        yield from depth0_positive(c.right)


def occurs_positively_depth0(phi: Concept, concepts: Iterable[Concept]) -> bool:
    """φ 是否在某个 ψ ∈ X 中以模态深度 0 正出现"""
    return any(phi == sub for psi in concepts for sub in depth0_positive(psi))


def _depth0_set(concepts: Iterable[Concept]) -> List[Concept]:
    seen: Dict[Concept, None] = {}
    for psi in concepts:
        for sub in depth0_positive(psi):
            seen.setdefault(sub, None)
    return sorted(seen, key=concept_key)


def _positive_nominals(concepts: Iterable[Concept], negated_too: bool = False) -> Set[Individual]:
    kinds = (Nominal, NegNominal) if negated_too else (Nominal,)
    return {sub.individual for sub in _depth0_set(concepts) if isinstance(sub, kinds)}


def relevant_atmost_one(tbox: Iterable[Concept], concepts: Iterable[Concept],
                        rbox: RBoxClosure) -> FrozenSet[AtMost]:
    """
    计算与 TBox 和概念集 X 相关的 ≤1 r.{a}

    第一组条件给出 (s1, C1, s2, C2)：X 中深度 0 正出现的 ≥m s.C（m ≥ 2），
    或两个不同的 ∃si.Ci / ≥1 si.Ci；r 取 s1、s2 的公共上位简单角色。
    第二组条件给出个体 a：{a} 在 T ∪ {C1} ∪ {C2} 中深度 0 正出现，
    或经由 T 中的 ∀r'.D / ≤n r'.D（s1, s2 ⊑ r'）出现。

    Returns:
        FrozenSet[AtMost]: 相关的 ≤1 r.{a} 概念
    """
    tbox = list(tbox)
    top_level = _depth0_set(concepts)
    tbox_depth0 = _depth0_set(tbox)

    pairs: List[Tuple[Role, Concept, Role, Concept]] = []
    for psi in top_level:
        if isinstance(psi, AtLeast) and psi.n >= 2:
            pairs.append((psi.role, psi.filler, psi.role, psi.filler))
    witnesses = [psi for psi in top_level
                 if isinstance(psi, Exists) or (isinstance(psi, AtLeast) and psi.n == 1)]
    for i, first in enumerate(witnesses):
        for second in witnesses[i + 1:]:
            pairs.append((first.role, first.filler, second.role, second.filler))

    result: Set[AtMost] = set()
    for s1, c1, s2, c2 in pairs:
        common = rbox.supers(s1) & rbox.supers(s2)
        individuals = _positive_nominals(tbox + [c1, c2])
        for psi in tbox_depth0:
            if isinstance(psi, Forall) and psi.role in common:
                individuals |= _positive_nominals([psi.filler])
            elif isinstance(psi, AtMost) and psi.role in common:
                individuals |= _positive_nominals([psi.filler], negated_too=True)
        for r in common:
            if not rbox.is_simple(r):
                continue
            for a in individuals:
                result.add(AtMost(1, r, Nominal(a)))
    return frozenset(result)


def assertion_relevant_atmost_one(tbox: Iterable[Concept], formulas: Iterable[Formula],
                                  individual: Individual, rbox: RBoxClosure) -> FrozenSet[Instance]:
    """a:≤1 r.{b}，相关性按 {C | a:C ∈ X} 计算"""
    concepts = [f.concept for f in formulas
                if isinstance(f, Instance) and f.individual == individual]
    return frozenset(Instance(individual, c) for c in relevant_atmost_one(tbox, concepts, rbox))


# ---------------------------------------------------------------------------
# 闭包集合
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosureSet:
    """closure(R,T,A)：标签包含性检查用的公式全集"""
    formulas: FrozenSet[Formula]
    concepts: FrozenSet[Concept]

    def __contains__(self, f: Formula) -> bool:
        return f in self.formulas

    def __len__(self) -> int:
        return len(self.formulas)


def _closure_concept_successors(c: Concept, kb: "KnowledgeBase") -> Iterator[Concept]:
    """概念层面的闭包规则（第 3 至 8 项）"""
    rbox = kb.rbox
    if isinstance(c, Forall):
        for r in sorted(rbox.subroles(c.role)):
            yield Forall(r, c.filler)
    if isinstance(c, AtMost) and c.n == 0 and not contains_internal(c.filler):
        yield Forall(c.role, negate_nnf(c.filler))
    if not isinstance(c, INTERNAL_FORMS) and not contains_internal(c):
        yield negate_nnf(c)
    if isinstance(c, Exists) and kb.is_numeric(c.role):
        yield SuccEq(1, c.role, c.filler)
    if isinstance(c, AtLeast):
        for m in range(0, min(kb.size, c.n - 1) + 1):
            yield SuccEq(c.n - m, c.role, c.filler)
    if isinstance(c, AtMost):
        for m in range(0, min(kb.size, c.n) + 1):
            yield PrecEq(c.n - m, c.role, c.filler)


def closure(kb: "KnowledgeBase") -> ClosureSet:
    """
    计算闭包集合（第 1 至 11 项的最小不动点）

    Args:
        kb: 已校验的知识库

    Returns:
        ClosureSet: 闭包
    """
    individuals = list(kb.individuals)
    roles = sorted(kb.rbox.roles)

    concepts: Set[Concept] = set()
    for c in kb.tbox:
        concepts.update(subconcepts(c))
    for f in kb.abox:
        concept = formula_concept(f)
        if concept is not None:
            concepts.update(subconcepts(concept))
    for r in roles:
        for a in individuals:
            concepts.add(AtMost(1, r, Nominal(a)))

    pending = list(concepts)
    while pending:
        c = pending.pop()
        for succ in _closure_concept_successors(c, kb):
            if succ not in concepts:
                concepts.add(succ)
                pending.append(succ)

    formulas: Set[Formula] = set(concepts)
    formulas.update(kb.abox)
    for a in individuals:
        formulas.update(Instance(a, c) for c in concepts)
        for b in individuals:
            formulas.add(Eq(a, b))
            formulas.add(NotEq(a, b))
            for r in roles:
                formulas.add(RoleAssertion(r, a, b))
                formulas.add(NegRoleAssertion(r, a, b))
    logger.debug(f"闭包计算完成: {len(concepts)} 个概念, {len(formulas)} 个公式")
    return ClosureSet(frozenset(formulas), frozenset(concepts))


def closure_violations(gamma: ClosureSet, kb: "KnowledgeBase") -> List[str]:
    """逐项检查闭包性质，返回违反项描述（空列表表示满足）"""
    problems: List[str] = []
    individuals = list(kb.individuals)
    for c in kb.tbox:
        for sub in subconcepts(c):
            if sub not in gamma.concepts:
                problems.append(f"item1: {show_concept(sub)}")
    for f in kb.abox:
        if f not in gamma:
            problems.append(f"item9: {show_formula(f)}")
    for r in kb.rbox.roles:
        for a in individuals:
            if AtMost(1, r, Nominal(a)) not in gamma.concepts:
                problems.append(f"item2: ≤1 {r}.{{{a}}}")
    for c in gamma.concepts:
        for succ in _closure_concept_successors(c, kb):
            if succ not in gamma.concepts:
                problems.append(f"{show_concept(c)} -> {show_concept(succ)}")
        for a in individuals:
            if Instance(a, c) not in gamma:
                problems.append(f"item10: {a}:{show_concept(c)}")
    for a in individuals:
        for b in individuals:
            for f in (Eq(a, b), NotEq(a, b)):
                if f not in gamma:
                    problems.append(f"item11: {show_formula(f)}")
            for r in kb.rbox.roles:
                for f in (RoleAssertion(r, a, b), NegRoleAssertion(r, a, b)):
                    if f not in gamma:
                        problems.append(f"item11: {show_formula(f)}")
    return problems
