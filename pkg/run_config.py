#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
运行配置模块
命令行与 YAML 配置文件共用的 RunConfig
"""

import logging
from dataclasses import dataclass, fields, replace
from typing import Any, Dict, Optional

import yaml

from ilp_feasibility import DEFAULT_NODE_BUDGET
from logic_core import ReasonerError
from semantics import MAX_ORACLE_DOMAIN
from tableau_rules import DEFAULT_STEP_LIMIT, SELECTION_STRATEGIES

logger = logging.getLogger(__name__)

DEFAULT_LOG_FILE = "shoq_reasoner.log"


@dataclass(frozen=True)
class RunConfig:
    """
    一次运行的全部选项

    优先级：默认值 < YAML 配置文件 < 命令行显式给出的参数
    """
    input_path: Optional[str] = None
    trace: bool = False
    trace_out: Optional[str] = None
    model_out: Optional[str] = None
    dot_out: Optional[str] = None
    stats: bool = False
    ilp_node_budget: int = DEFAULT_NODE_BUDGET
    step_limit: int = DEFAULT_STEP_LIMIT
    oracle_check: bool = False
    oracle_max_domain: int = 3
    selection: str = "depth-first"
    log_file: str = DEFAULT_LOG_FILE
    verbose: bool = False

    def validate(self) -> "RunConfig":
        """
        检查取值范围

        Raises:
            ReasonerError: 取值非法
        """
        if self.ilp_node_budget < 1:
            raise ReasonerError(f"ilp_node_budget 必须为正整数: {self.ilp_node_budget}")
        if self.step_limit < 1:
            raise ReasonerError(f"step_limit 必须为正整数: {self.step_limit}")
        if not 1 <= self.oracle_max_domain <= MAX_ORACLE_DOMAIN:
            raise ReasonerError(f"oracle_max_domain 必须在 1..{MAX_ORACLE_DOMAIN} 之间: {self.oracle_max_domain}")
        if self.selection not in SELECTION_STRATEGIES:
            raise ReasonerError(f"未知的节点选择策略: {self.selection}")
        return self

    def merged(self, overrides: Dict[str, Any]) -> "RunConfig":
        """用非 None 的值覆盖当前配置"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


_FIELD_TYPES = {
    "input_path": (str,),
    "trace": (bool,),
    "trace_out": (str,),
    "model_out": (str,),
    "dot_out": (str,),
    "stats": (bool,),
    "ilp_node_budget": (int,),
    "step_limit": (int,),
    "oracle_check": (bool,),
    "oracle_max_domain": (int,),
    "selection": (str,),
    "log_file": (str,),
    "verbose": (bool,),
}


def _check_value(key: str, value: Any) -> None:
    if value is None:
        return
    expected = _FIELD_TYPES[key]
    # bool 是 int 的子类
    if expected == (int,) and isinstance(value, bool):
        raise ReasonerError(f"配置项 {key} 应为整数: {value!r}")
    if not isinstance(value, expected):
        raise ReasonerError(f"配置项 {key} 的类型错误: {value!r}")


def load_config_file(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    """
    读取 YAML 配置文件

    Args:
        path: 配置文件路径
        base: 被覆盖的配置（默认为 RunConfig()）

    Returns:
        RunConfig: 合并后的配置

    Raises:
        ReasonerError: 文件无法读取、不是映射、键未知或类型错误
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ReasonerError(f"无法读取配置文件 {path}: {e}")
    except yaml.YAMLError as e:
        raise ReasonerError(f"配置文件 {path} 不是合法的 YAML: {e}")

    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ReasonerError(f"配置文件 {path} 的顶层必须是映射")

    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(str(k) for k in data if k not in known)
    if unknown:
        raise ReasonerError(f"配置文件 {path} 含有未知配置项: {', '.join(unknown)}")
    for key, value in data.items():
        _check_value(key, value)

    logger.debug(f"读取配置文件 {path}: {sorted(data)}")
    return (base or RunConfig()).merged(data).validate()
