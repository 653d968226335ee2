#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
SHOQ 可满足性检查器主程序
读取知识库、运行表格推理、验证并输出模型，按结论给出退出码
"""

import sys
import logging
import argparse
from typing import List, Optional

from colorama import Fore, Style

from debug_graph import export_dot
from kb_parser import KnowledgeBase, load_kb
from logic_core import (
    ExtractionError, KBSyntaxError, KBValidationError, OraclePreconditionError,
    ReasonerError, ResourceLimitError, TableauDefectError,
)
from model_extraction import check_model_graph, corresponding_model, extract_model
from run_config import DEFAULT_LOG_FILE, RunConfig, load_config_file
from semantics import Interpretation, brute_force_sat, check_model, format_model
from tableau_rules import SELECTION_STRATEGIES, ReasoningResult, TableauReasoner

logger = logging.getLogger(__name__)

EXIT_SAT = 0
EXIT_UNSAT = 1
EXIT_INPUT_ERROR = 2
EXIT_INCONCLUSIVE = 3


def setup_logging(log_file: Optional[str] = DEFAULT_LOG_FILE, verbose: bool = False) -> None:
    """
    配置日志：分离控制台和文件输出

    Args:
        log_file: 日志文件，空字符串或 None 表示不写文件
        verbose: 控制台是否显示 INFO
    """
    handlers: List[logging.Handler] = []

    # 文件处理器：记录所有级别的日志（DEBUG及以上）
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
        handlers.append(file_handler)

    # 控制台处理器：默认只显示警告及以上
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO if verbose else logging.WARNING)
    console_handler.setFormatter(logging.Formatter('%(name)s - %(levelname)s - %(message)s'))
    handlers.append(console_handler)

    logging.basicConfig(level=logging.DEBUG, handlers=handlers, force=True)


def _colored(text: str, color: str, stream=None) -> str:
    stream = stream or sys.stdout
    if hasattr(stream, "isatty") and stream.isatty():
        return f"{color}{text}{Style.RESET_ALL}"
    return text


def _diagnostic(message: str) -> None:
    """一行诊断信息写到 stderr"""
    print(_colored(message, Fore.RED, sys.stderr), file=sys.stderr)


class ReasonerApp:
    """命令行应用：一次运行处理一个知识库"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.kb: Optional[KnowledgeBase] = None
        self.result: Optional[ReasoningResult] = None
        self.model: Optional[Interpretation] = None

    def load(self) -> KnowledgeBase:
        logger.info(f"读取知识库 {self.config.input_path}")
        self.kb = load_kb(self.config.input_path)
        return self.kb

    def reason(self) -> ReasoningResult:
        config = self.config
        reasoner = TableauReasoner(
            self.kb,
            node_budget=config.ilp_node_budget,
            step_limit=config.step_limit,
            selection=config.selection,
            trace=config.trace or bool(config.trace_out),
        )
        self.result = reasoner.run()
        return self.result

    def verify_model(self) -> Interpretation:
        """
        抽取模型并由模型检查器复核

        Raises:
            ExtractionError: 抽取失败或模型未通过检查
        """
        graph_model = extract_model(self.result.graph, self.kb, self.config.ilp_node_budget)
        problems = check_model_graph(graph_model, self.kb)
        for problem in problems:
            logger.debug(f"模型图条件不满足: {problem}")
        model = corresponding_model(graph_model, self.kb.rbox)
        verdict = check_model(model, self.kb)
        if not verdict:
            raise ExtractionError(f"抽取的模型未通过检查: {verdict.violation}")
        logger.info(f"模型验证通过: {len(model.delta)} 个元素")
        self.model = model
        return model

    def oracle_check(self) -> bool:
        """UNSAT 时用有界模型搜索交叉检查；返回 False 表示发现了矛盾"""
        try:
            search = brute_force_sat(self.kb, self.config.oracle_max_domain)
        except OraclePreconditionError as e:
            logger.warning(f"跳过预言机检查: {e}")
            return True
        if search and not self.result.satisfiable:
            logger.error(f"推理结论为 UNSAT，但在论域 ≤ {search.max_domain} 内找到了模型")
            return False
        return True

    def write_outputs(self) -> None:
        config = self.config
        result = self.result
        if result.trace:
            if config.trace_out:
                with open(config.trace_out, "w", encoding="utf-8") as f:
                    f.write("\n".join(result.trace) + "\n")
                logger.info(f"规则跟踪已写入 {config.trace_out}")
            if config.trace:
                for line in result.trace:
                    print(line)
        if config.dot_out:
            export_dot(result.graph, config.dot_out)
        if config.model_out and self.model is not None:
            with open(config.model_out, "w", encoding="utf-8") as f:
                f.write(format_model(self.model))
            logger.info(f"模型已写入 {config.model_out}")

    def run(self) -> int:
        """
        运行主流程

        Returns:
            int: 退出码（0 SAT，1 UNSAT，2 输入错误，3 无结论或缺陷）
        """
        try:
            self.load()
        except OSError as e:
            logger.error(f"无法读取知识库: {e}")
            _diagnostic(f"error: 无法读取 {self.config.input_path}: {e.strerror or e}")
            return EXIT_INPUT_ERROR
        except (KBSyntaxError, KBValidationError) as e:
            logger.error(f"知识库无效: {e}")
            _diagnostic(f"error: {e}")
            return EXIT_INPUT_ERROR

        try:
            result = self.reason()
        except ResourceLimitError as e:
            logger.warning(f"资源上限: {e}")
            _diagnostic(f"inconclusive: {e}")
            return EXIT_INCONCLUSIVE
        except TableauDefectError as e:
            logger.error(f"表格图不变式被破坏: {e}")
            _diagnostic(f"defect: {e}")
            return EXIT_INCONCLUSIVE

        code = EXIT_SAT if result.satisfiable else EXIT_UNSAT
        if result.satisfiable:
            try:
                self.verify_model()
            except (ExtractionError, ResourceLimitError) as e:
                logger.warning(f"SAT 结论未能由模型验证，降级为无结论: {e}")
                _diagnostic(f"defect: {e}")
                code = EXIT_INCONCLUSIVE
        elif self.config.oracle_check and not self.oracle_check():
            _diagnostic("defect: 有界模型搜索找到了模型")
            code = EXIT_INCONCLUSIVE

        self.write_outputs()
        if code == EXIT_SAT:
            print(_colored("SAT", Fore.GREEN))
        elif code == EXIT_UNSAT:
            print(_colored("UNSAT", Fore.YELLOW))
        else:
            print("UNKNOWN")
        if self.config.stats:
            for line in result.stats.lines():
                print(line)
        return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='SHOQ 知识库可满足性检查器')
    parser.add_argument('input_path', help='知识库文件')
    parser.add_argument('--config', help='YAML 配置文件')
    parser.add_argument('--trace', action='store_true', default=None,
                        help='输出规则应用跟踪')
    parser.add_argument('--trace-out', dest='trace_out', help='把规则跟踪写入文件')
    parser.add_argument('--model', dest='model_out', help='SAT 时把验证过的模型写入文件')
    parser.add_argument('--dot', dest='dot_out', help='把最终的表格图写成 DOT 文件')
    parser.add_argument('--stats', action='store_true', default=None, help='输出统计信息')
    parser.add_argument('--ilp-node-budget', dest='ilp_node_budget', type=int,
                        help='整数规划搜索节点预算')
    parser.add_argument('--step-limit', dest='step_limit', type=int, help='规则应用步数上限')
    parser.add_argument('--oracle-check', dest='oracle_check', action='store_true', default=None,
                        help='UNSAT 时用有界模型搜索交叉检查')
    parser.add_argument('--oracle-max-domain', dest='oracle_max_domain', type=int,
                        help='有界模型搜索的最大论域')
    parser.add_argument('--selection', choices=SELECTION_STRATEGIES, help='节点选择策略')
    parser.add_argument('--log-file', dest='log_file', help="日志文件（'' 表示不写文件）")
    parser.add_argument('--verbose', action='store_true', default=None, help='控制台显示 INFO 日志')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k != 'config'}

    try:
        config = load_config_file(args.config) if args.config else RunConfig()
        config = config.merged(overrides).validate()
    except ReasonerError as e:
        _diagnostic(f"error: {e}")
        return EXIT_INPUT_ERROR

    setup_logging(config.log_file, config.verbose)
    try:
        return ReasonerApp(config).run()
    except Exception as e:
        logger.exception(f"程序运行错误: {e}")
        _diagnostic(f"defect: {e}")
        return EXIT_INCONCLUSIVE


if __name__ == '__main__':
    sys.exit(main())
