#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
调试表格图结构的脚本
提供 DOT 导出，并可直接打印一次推理后的节点与边
"""

import sys
import logging
import argparse
from typing import List

from kb_parser import load_kb
from logic_core import ReasonerError, show_label
from tableau_graph import EdgeType, StatusKind, TableauGraph
from tableau_rules import check_satisfiability

logger = logging.getLogger(__name__)

# 按状态填充颜色
STATUS_COLORS = {
    StatusKind.UNEXPANDED: "white",
    StatusKind.P_EXPANDED: "lightyellow",
    StatusKind.F_EXPANDED: "lightblue",
    StatusKind.CLOSED: "lightcoral",
    StatusKind.OPEN: "lightgreen",
    StatusKind.BLOCKED: "lightgray",
    StatusKind.CLOSED_WRT: "orange",
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(graph: TableauGraph) -> str:
    """
    把表格图转为 DOT 文本

    状态画成方框、非状态画成椭圆，按状态着色；
    checkingFeasibility 边为虚线，testingClosedness 边为实线。
    """
    lines: List[str] = ["digraph tableau {", "\tnode [fontname=Arial fontsize=10 style=filled]",
                        "\tedge [fontname=Arial fontsize=8]"]
    for v in sorted(graph.nodes):
        node = graph.node(v)
        shape = "box" if node.is_state else "ellipse"
        color = STATUS_COLORS[node.status.kind]
        label = f"{node.name} [{node.stype.value}] {node.status}\\n{show_label(node.label)}"
        lines.append(f"\t{node.name} [label={_quote(label)} shape={shape} fillcolor={color}]")
    for v in sorted(graph.nodes):
        for w in graph.successors(v):
            labels = graph.elabels(v, w)
            if not labels:
                lines.append(f"\tv{v} -> v{w}")
                continue
            for e in labels:
                style = "dashed" if e.pi_t is EdgeType.CHECKING_FEASIBILITY else "solid"
                lines.append(f"\tv{v} -> v{w} [label={_quote(str(e))} style={style}]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(graph: TableauGraph, path: str) -> None:
    """把表格图写成 DOT 文件（用 dot -Tpng 渲染）"""
    with open(path, "w", encoding="utf-8") as out:
        out.write(to_dot(graph))
    logger.info(f"表格图已导出到 {path}: {len(graph.nodes)} 个节点, {graph.edge_count()} 条边")


def main():
    parser = argparse.ArgumentParser(description='打印表格图结构')
    parser.add_argument('kb', help='知识库文件')
    parser.add_argument('--dot', help='同时导出 DOT 文件')
    args = parser.parse_args()

    print("调试表格图结构")
    print("=" * 50)

    try:
        result = check_satisfiability(load_kb(args.kb))
    except (OSError, ReasonerError) as e:
        print(f"✗ 推理失败: {e}")
        sys.exit(2)

    graph = result.graph
    print(f"结论: {'SAT' if result.satisfiable else 'UNSAT'}")
    print(f"节点数量: {len(graph.nodes)}")
    print(f"\n节点列表:")
    for v in sorted(graph.nodes):
        print(f"  {graph.describe(v)}")

    print(f"\n邻接关系:")
    for v in sorted(graph.nodes):
        successors = graph.successors(v)
        print(f"  v{v}:")
        if not successors:
            print(f"    (无后继)")
        for w in successors:
            labels = ", ".join(str(e) for e in graph.elabels(v, w))
            print(f"    -> v{w} {labels}".rstrip())

    if args.dot:
        export_dot(graph, args.dot)
        print(f"\nDOT 文件: {args.dot}")


if __name__ == "__main__":
    main()
