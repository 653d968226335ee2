#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
差分测试：随机小知识库上比较表格推理与有界模型搜索
"""

import random

import pytest

from logic_core import ExtractionError, OraclePreconditionError
from model_extraction import corresponding_model, extract_model
from semantics import brute_force_sat, check_model
from test_utils import ReasonerTestUtils

SEEDS = range(500)


def oracle(kb):
    try:
        return brute_force_sat(kb, 4)
    except OraclePreconditionError:
        return None


@pytest.mark.parametrize("seed", SEEDS)
def test_random_kb(seed):
    rng = random.Random(seed)
    kb = ReasonerTestUtils.random_kb(rng)
    result = ReasonerTestUtils.run(kb, trace=False)
    assert ReasonerTestUtils.structural_problems(result.graph, kb) == []

    search = oracle(kb)
    if search:
        assert result.satisfiable, f"存在论域 ≤ 4 的模型:\n{search.model}"

    if result.satisfiable:
        try:
            m = extract_model(result.graph, kb)
        except ExtractionError as e:
            pytest.fail(f"SAT 但模型抽取失败: {e}")
        verdict = check_model(corresponding_model(m, kb.rbox), kb)
        assert verdict, verdict.violation


def test_both_verdicts_occur():
    verdicts = set()
    for seed in SEEDS:
        kb = ReasonerTestUtils.random_kb(random.Random(seed))
        verdicts.add(ReasonerTestUtils.run(kb, trace=False).satisfiable)
        if len(verdicts) == 2:
            break
    assert verdicts == {True, False}
