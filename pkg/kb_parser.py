#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
知识库解析模块
把文本格式的SHOQ知识库解析为经过校验的 KnowledgeBase，
预先计算 RBox 闭包 ext(R) 以及角色分类（传递、简单、数值）
"""

import re
import sys
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from logic_core import (
    BOT, TOP, And, AtLeast, AtMost, Atomic, Concept, Exists, Forall, Formula,
    Individual, Instance, KBSyntaxError, KBValidationError, NegAtomic,
    NegNominal, Nominal, NotEq, NUMBER_RESTRICTIONS, Not, Or, RBoxClosure,
    Role, RoleAssertion, InternalConceptError, Bot, Top, concept_roles,
    concept_size, formula_concept, formula_individuals, negate_nnf, nnf,
    show_concept, subconcepts,
)

logger = logging.getLogger(__name__)

# 数量约束中允许的最大数（机器字长）
MAX_NUMBER = 2 ** 63 - 1

KEYWORDS = frozenset({
    "top", "bot", "not", "and", "or", "some", "only", "atleast", "atmost",
    "one", "rbox", "tbox", "abox", "sub", "trans", "equiv",
})

_TOKEN_RE = re.compile(r"\s*(?:(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<number>\d+)"
                       r"|(?P<op>!=|[():,]))")


@dataclass(frozen=True)
class RBoxAxiom:
    """RBox 公理：sub 表示 r ⊑ s，trans 表示 Trans(r)"""
    kind: str
    role: Role
    super_role: Optional[Role] = None


@dataclass(frozen=True)
class TBoxAxiom:
    """TBox 公理：kind 为 sub（C ⊑ D）或 equiv（C ≐ D），两侧均为 NNF"""
    kind: str
    lhs: Concept
    rhs: Concept

    def encode(self) -> Concept:
        """编码为全局假设概念"""
        forward = Or(negate_nnf(self.lhs), self.rhs)
        if self.kind == "sub":
            return forward
        return And(forward, Or(negate_nnf(self.rhs), self.lhs))


@dataclass(frozen=True)
class KnowledgeBase:
    """
    SHOQ 知识库 ⟨R, T, A⟩

    Attributes:
        rbox: RBox 闭包
        tbox: 全局假设概念（已编码的 TBox 公理）
        abox: ABox 断言（输入顺序、去重）
        individuals: 个体，按首次出现顺序
        rbox_axioms / tbox_axioms: 原始公理，用于格式化输出
    """
    rbox: RBoxClosure
    tbox: FrozenSet[Concept]
    abox: Tuple[Formula, ...]
    individuals: Tuple[Individual, ...]
    rbox_axioms: Tuple[RBoxAxiom, ...] = ()
    tbox_axioms: Tuple[TBoxAxiom, ...] = ()
    numeric_roles: FrozenSet[Role] = field(default=frozenset(), compare=False)
    size: int = field(default=0, compare=False)

    @property
    def roles(self) -> FrozenSet[Role]:
        return self.rbox.roles

    def is_numeric(self, r: Role) -> bool:
        return r in self.numeric_roles

    def concepts(self) -> List[Concept]:
        """KB 中出现的全部顶层概念（TBox 与 ABox）"""
        result = list(self.tbox)
        for f in self.abox:
            concept = formula_concept(f)
            if concept is not None:
                result.append(concept)
        return result


# ---------------------------------------------------------------------------
# RBox
# ---------------------------------------------------------------------------

def build_rbox_closure(axioms: Iterable[RBoxAxiom], mentioned_roles: Iterable[Role]) -> RBoxClosure:
    """
    计算 ext(R)：子角色关系的自反传递闭包

    Args:
        axioms: RBox 公理
        mentioned_roles: KB 中提及的所有角色

    Returns:
        RBoxClosure: 闭包
    """
    roles: Set[Role] = set(mentioned_roles)
    transitive: Set[Role] = set()
    edges: Set[Tuple[Role, Role]] = set()
    for axiom in axioms:
        roles.add(axiom.role)
        if axiom.kind == "trans":
            transitive.add(axiom.role)
        else:
            roles.add(axiom.super_role)
            edges.add((axiom.role, axiom.super_role))

    subrole: Set[Tuple[Role, Role]] = {(r, r) for r in roles} | edges
    changed = True
    while changed:
        changed = False
        for r, s in list(subrole):
            for s2, t in list(subrole):
                if s == s2 and (r, t) not in subrole:
                    subrole.add((r, t))
                    changed = True
    return RBoxClosure(frozenset(subrole), frozenset(transitive), frozenset(roles))


def is_simple(r: Role, rbox: RBoxClosure) -> bool:
    """r 既不传递也没有传递子角色"""
    return rbox.is_simple(r)


def compute_numeric_roles(rbox: RBoxClosure, concepts: Iterable[Concept]) -> FrozenSet[Role]:
    """数值角色：出现在 ≥/≤ 中的简单角色，以及数值角色的子角色"""
    direct: Set[Role] = set()
    for c in concepts:
        for sub in subconcepts(c):
            if isinstance(sub, (AtLeast, AtMost)) and rbox.is_simple(sub.role):
                direct.add(sub.role)
    numeric: Set[Role] = set()
    for r in direct:
        numeric |= rbox.subroles(r)
    return frozenset(numeric)


def is_numeric(r: Role, kb: KnowledgeBase) -> bool:
    return kb.is_numeric(r)


# ---------------------------------------------------------------------------
# 词法与语法分析
# ---------------------------------------------------------------------------

@dataclass
class _Token:
    kind: str
    text: str
    column: int


def _tokenize(line: str, line_no: int) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(line):
        if line[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(line, pos)
        if match is None or match.end() == pos:
            column = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
            raise KBSyntaxError(f"无法识别的字符 {line[column - 1]!r}", line_no, column)
        kind = match.lastgroup
        text = match.group(kind)
        tokens.append(_Token(kind, text, match.start(kind) + 1))
        pos = match.end()
    return tokens


class _LineParser:
    """单行的递归下降解析器"""

    def __init__(self, tokens: List[_Token], line_no: int, line: str):
        self.tokens = tokens
        self.pos = 0
        self.line_no = line_no
        self.end_column = len(line.rstrip()) + 1

    def error(self, message: str) -> KBSyntaxError:
        column = self.tokens[self.pos].column if self.pos < len(self.tokens) else self.end_column
        return KBSyntaxError(message, self.line_no, column)

    def peek(self, offset: int = 0) -> Optional[_Token]:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def take(self) -> _Token:
        token = self.peek()
        if token is None:
            raise self.error("行意外结束")
        self.pos += 1
        return token

    def expect(self, text: str) -> None:
        token = self.peek()
        if token is None or token.text != text:
            found = token.text if token else "行尾"
            raise self.error(f"期望 {text!r}，实际为 {found!r}")
        self.pos += 1

    def name(self, what: str) -> str:
        token = self.peek()
        if token is None or token.kind != "name" or token.text in KEYWORDS:
            found = token.text if token else "行尾"
            raise self.error(f"期望{what}名，实际为 {found!r}")
        self.pos += 1
        return sys.intern(token.text)

    def number(self) -> int:
        token = self.peek()
        if token is None or token.kind != "number":
            raise self.error("期望非负整数")
        value = int(token.text)
        if value > MAX_NUMBER:
            raise self.error(f"数值溢出: {token.text}")
        self.pos += 1
        return value

    def finish(self) -> None:
        if self.peek() is not None:
            raise self.error(f"多余的记号 {self.peek().text!r}")

    def concept(self) -> Concept:
        token = self.peek()
        if token is None:
            raise self.error("期望概念")
        if token.text == "(":
            self.pos += 1
            left = self.concept()
            op = self.take()
            if op.text not in ("and", "or"):
                self.pos -= 1
                raise self.error(f"期望 'and' 或 'or'，实际为 {op.text!r}")
            right = self.concept()
            self.expect(")")
            return And(left, right) if op.text == "and" else Or(left, right)
        if token.kind != "name":
            raise self.error(f"期望概念，实际为 {token.text!r}")
        self.pos += 1
        word = token.text
        if word == "top":
            return TOP
        if word == "bot":
            return BOT
        if word == "not":
            return Not(self.concept())
        if word == "one":
            return Nominal(self.name("个体"))
        if word in ("some", "only"):
            role = self.name("角色")
            filler = self.concept()
            return Exists(role, filler) if word == "some" else Forall(role, filler)
        if word in ("atleast", "atmost"):
            n = self.number()
            role = self.name("角色")
            filler = self.concept()
            return AtLeast(n, role, filler) if word == "atleast" else AtMost(n, role, filler)
        if word in KEYWORDS:
            self.pos -= 1
            raise self.error(f"关键字 {word!r} 不能用作概念名")
        return Atomic(sys.intern(word))


def parse_concept(text: str) -> Concept:
    """解析单个概念并转换为 NNF（测试与调试用）"""
    parser = _LineParser(_tokenize(text, 1), 1, text)
    concept = parser.concept()
    parser.finish()
    return nnf(concept)


def parse_kb(text: str) -> KnowledgeBase:
    """
    解析知识库文本

    Args:
        text: 知识库文本（UTF-8，按行组织，# 开始注释）

    Returns:
        KnowledgeBase: 经过校验的知识库

    Raises:
        KBSyntaxError: 语法错误
        KBValidationError: 数量约束使用了非简单角色
    """
    rbox_axioms: Dict[RBoxAxiom, None] = {}
    tbox_axioms: Dict[TBoxAxiom, None] = {}
    abox: Dict[Formula, None] = {}
    individuals: Dict[Individual, None] = {}
    roles: Dict[Role, None] = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        tokens = _tokenize(line, line_no)
        if not tokens:
            continue
        parser = _LineParser(tokens, line_no, line)
        section = parser.take()
        if section.text == "rbox":
            axiom = _parse_rbox_line(parser)
            rbox_axioms.setdefault(axiom, None)
            roles.setdefault(axiom.role, None)
            if axiom.super_role:
                roles.setdefault(axiom.super_role, None)
        elif section.text == "tbox":
            lhs = nnf(parser.concept())
            kind_token = parser.take()
            if kind_token.text not in ("sub", "equiv"):
                parser.pos -= 1
                raise parser.error(f"期望 'sub' 或 'equiv'，实际为 {kind_token.text!r}")
            rhs = nnf(parser.concept())
            parser.finish()
            axiom = TBoxAxiom(kind_token.text, lhs, rhs)
            tbox_axioms.setdefault(axiom, None)
            for c in (lhs, rhs):
                _note_concept(c, individuals, roles)
        elif section.text == "abox":
            formula = _parse_abox_line(parser)
            abox.setdefault(formula, None)
            for a in formula_individuals(formula):
                individuals.setdefault(a, None)
            concept = formula_concept(formula)
            if concept is not None:
                _note_concept(concept, individuals, roles)
            elif isinstance(formula, RoleAssertion):
                roles.setdefault(formula.role, None)
        else:
            parser.pos -= 1
            raise parser.error(f"未知的段落关键字 {section.text!r}")

    kb = make_kb(list(rbox_axioms), list(tbox_axioms), list(abox), list(individuals), list(roles))
    logger.info(f"知识库解析完成: {len(kb.abox)} 条断言, {len(kb.tbox)} 条TBox公理, "
                f"{len(kb.rbox_axioms)} 条RBox公理, {len(kb.individuals)} 个个体")
    return kb


def _note_concept(c: Concept, individuals: Dict[Individual, None], roles: Dict[Role, None]) -> None:
    for sub in subconcepts(c):
        if isinstance(sub, (Nominal, NegNominal)):
            individuals.setdefault(sub.individual, None)
        elif isinstance(sub, (Exists, Forall)) or isinstance(sub, NUMBER_RESTRICTIONS):
            roles.setdefault(sub.role, None)


def _parse_rbox_line(parser: _LineParser) -> RBoxAxiom:
    token = parser.peek()
    if token is not None and token.text == "trans":
        parser.pos += 1
        role = parser.name("角色")
        parser.finish()
        return RBoxAxiom("trans", role)
    role = parser.name("角色")
    parser.expect("sub")
    super_role = parser.name("角色")
    parser.finish()
    return RBoxAxiom("sub", role, super_role)


def _parse_abox_line(parser: _LineParser) -> Formula:
    first = parser.name("个体或角色")
    token = parser.peek()
    if token is None:
        raise parser.error("期望 ':'、'(' 或 '!='")
    if token.text == ":":
        parser.pos += 1
        concept = nnf(parser.concept())
        parser.finish()
        return Instance(first, concept)
    if token.text == "(":
        parser.pos += 1
        source = parser.name("个体")
        parser.expect(",")
        target = parser.name("个体")
        parser.expect(")")
        parser.finish()
        return RoleAssertion(first, source, target)
    if token.text == "!=":
        parser.pos += 1
        other = parser.name("个体")
        parser.finish()
        return NotEq(first, other)
    raise parser.error(f"期望 ':'、'(' 或 '!='，实际为 {token.text!r}")


# ---------------------------------------------------------------------------
# 构造与校验
# ---------------------------------------------------------------------------

def _formula_size(f: Formula) -> int:
    concept = formula_concept(f)
    if concept is None:
        return 3
    return concept_size(concept) + (1 if isinstance(f, Instance) else 0)


def make_kb(rbox_axioms: List[RBoxAxiom], tbox_axioms: List[TBoxAxiom], abox: List[Formula],
            individuals: List[Individual], roles: Iterable[Role] = ()) -> KnowledgeBase:
    """由公理列表构造并校验知识库（测试中也直接使用）"""
    tbox = [axiom.encode() for axiom in tbox_axioms]
    mentioned: Dict[Role, None] = dict.fromkeys(roles)
    for c in tbox:
        mentioned.update(dict.fromkeys(sorted(concept_roles(c))))
    for f in abox:
        concept = formula_concept(f)
        if concept is not None:
            mentioned.update(dict.fromkeys(sorted(concept_roles(concept))))
        elif isinstance(f, RoleAssertion):
            mentioned.setdefault(f.role, None)
    ordered_individuals: Dict[Individual, None] = dict.fromkeys(individuals)
    for f in abox:
        ordered_individuals.update(dict.fromkeys(formula_individuals(f)))
    for c in tbox:
        for sub in subconcepts(c):
            if isinstance(sub, (Nominal, NegNominal)):
                ordered_individuals.setdefault(sub.individual, None)

    rbox = build_rbox_closure(rbox_axioms, mentioned)
    size = (sum(_formula_size(f) for f in abox)
            + sum(concept_size(a.lhs) + concept_size(a.rhs) + 1 for a in tbox_axioms)
            + sum(2 if a.kind == "trans" else 3 for a in rbox_axioms))
    kb = KnowledgeBase(
        rbox=rbox,
        tbox=frozenset(tbox),
        abox=tuple(dict.fromkeys(abox)),
        individuals=tuple(ordered_individuals),
        rbox_axioms=tuple(dict.fromkeys(rbox_axioms)),
        tbox_axioms=tuple(dict.fromkeys(tbox_axioms)),
        size=max(size, 1),
    )
    return validate(kb)


def _fresh_individual(used: Iterable[Individual]) -> Individual:
    used = set(used)
    candidate, k = "aux", 0
    while candidate in used:
        k += 1
        candidate = f"aux{k}"
    return candidate


def validate(kb: KnowledgeBase) -> KnowledgeBase:
    """
    校验知识库并补全

    数量约束必须使用简单角色；ABox 为空时添加 aux:⊤（aux 为新个体名）。

    Returns:
        KnowledgeBase: 补全后的知识库（含数值角色与规模）
    """
    for c in kb.concepts():
        for sub in subconcepts(c):
            if isinstance(sub, NUMBER_RESTRICTIONS) and not isinstance(sub, (AtLeast, AtMost)):
                raise KBValidationError(f"输入中不允许内部形式: {show_concept(sub)}")
            if isinstance(sub, Not):
                raise KBValidationError(f"概念不是 NNF: {show_concept(c)}")
            if isinstance(sub, (AtLeast, AtMost)) and not kb.rbox.is_simple(sub.role):
                raise KBValidationError(
                    f"non-simple role in number restriction: 角色 {sub.role} 出现在 {show_concept(sub)} 中")

    abox = kb.abox
    individuals = kb.individuals
    if not abox:
        aux = _fresh_individual(individuals)
        abox = (Instance(aux, TOP),)
        individuals = individuals + (aux,)
        logger.info(f"ABox 为空，补充断言 {aux}:⊤")

    numeric = compute_numeric_roles(kb.rbox, list(kb.tbox) + [c for c in (formula_concept(f) for f in abox) if c])
    return KnowledgeBase(
        rbox=kb.rbox, tbox=kb.tbox, abox=abox, individuals=individuals,
        rbox_axioms=kb.rbox_axioms, tbox_axioms=kb.tbox_axioms,
        numeric_roles=numeric, size=kb.size or 1,
    )


# ---------------------------------------------------------------------------
# 格式化输出
# ---------------------------------------------------------------------------

def concept_to_text(c: Concept) -> str:
    """按输入语法输出概念"""
    if isinstance(c, Top):
        return "top"
    if isinstance(c, Bot):
        return "bot"
    if isinstance(c, Atomic):
        return c.name
    if isinstance(c, NegAtomic):
        return f"not {c.name}"
    if isinstance(c, Nominal):
        return f"one {c.individual}"
    if isinstance(c, NegNominal):
        return f"not one {c.individual}"
    if isinstance(c, Not):
        return f"not {concept_to_text(c.operand)}"
    if isinstance(c, And):
        return f"({concept_to_text(c.left)} and {concept_to_text(c.right)})"
    if isinstance(c, Or):
        return f"({concept_to_text(c.left)} or {concept_to_text(c.right)})"
    if isinstance(c, Exists):
        return f"some {c.role} {concept_to_text(c.filler)}"
    if isinstance(c, Forall):
        return f"only {c.role} {concept_to_text(c.filler)}"
    if isinstance(c, AtLeast):
        return f"atleast {c.n} {c.role} {concept_to_text(c.filler)}"
    if isinstance(c, AtMost):
        return f"atmost {c.n} {c.role} {concept_to_text(c.filler)}"
    raise InternalConceptError(f"内部形式不能输出为输入语法: {show_concept(c)}")


def format_kb(kb: KnowledgeBase) -> str:
    """把知识库输出为可再解析的文本"""
    lines: List[str] = []
    for axiom in kb.rbox_axioms:
        if axiom.kind == "trans":
            lines.append(f"rbox trans {axiom.role}")
        else:
            lines.append(f"rbox {axiom.role} sub {axiom.super_role}")
    for axiom in kb.tbox_axioms:
        lines.append(f"tbox {concept_to_text(axiom.lhs)} {axiom.kind} {concept_to_text(axiom.rhs)}")
    for f in kb.abox:
        if isinstance(f, Instance):
            lines.append(f"abox {f.individual} : {concept_to_text(f.concept)}")
        elif isinstance(f, RoleAssertion):
            lines.append(f"abox {f.role}({f.source}, {f.target})")
        elif isinstance(f, NotEq):
            lines.append(f"abox {f.left} != {f.right}")
        else:
            raise KBValidationError(f"该断言不能出现在输入 ABox 中: {f}")
    return "\n".join(lines) + "\n"


def load_kb(path: str) -> KnowledgeBase:
    """读取并解析知识库文件"""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_kb(handle.read())
