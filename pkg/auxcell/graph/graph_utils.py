# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

from typing import Dict, Tuple

from graphviz import Digraph

from auxcell.genome import OPERATIONS
from auxcell.graph.graph_builder import FeatureDesc, GraphIR, GraphNode


def conv_cost(
    kernel: int,
    c_in: int,
    c_out: int,
    height: int,
    width: int,
    batch_norm: bool = False,
    depthwise: bool = False,
    bias: bool = False,
) -> Tuple[int, int]:
    """
    Parameters and multiply-adds of one stride 1 convolution on a height x width output.
    A depthwise convolution has one k x k filter per input channel (c_out == c_in).
    """
    weights = kernel * kernel * c_in if depthwise else kernel * kernel * c_in * c_out
    params = weights
    if batch_norm:
        params += 2 * c_out
    if bias:
        params += c_out
    return params, weights * height * width


def node_cost(ir: GraphIR, node: GraphNode) -> Tuple[int, int]:
    """Analytic (params, madds) of one node; sum, upsample, concat, skip and zero cost nothing."""
    out = node.out_desc
    h, w = out.height, out.width

    if node.kind in ("adapt-1x1", "fuse-1x1"):
        c_in = ir.node(node.inputs[0]).out_desc.channels
        return conv_cost(1, c_in, out.channels, h, w, batch_norm=True)

    if node.kind in ("classifier", "aux-classifier"):
        c_in = ir.node(node.inputs[0]).out_desc.channels
        return conv_cost(1, c_in, out.channels, h, w, bias=True)

    if node.kind in ("cell-op", "aux-cell-op"):
        spec = OPERATIONS[node.op]
        c = out.channels
        if spec.kind == "conv":
            return conv_cost(spec.kernel, c, c, h, w, batch_norm=True)
        if spec.kind == "sep":
            dw = conv_cost(spec.kernel, c, c, h, w, batch_norm=True, depthwise=True)
            pw = conv_cost(1, c, c, h, w, batch_norm=True)
            return dw[0] + pw[0], dw[1] + pw[1]
        if spec.kind == "gap":
            # 1x1 conv on the pooled 1x1 map
            return conv_cost(1, c, c, 1, 1, batch_norm=True)

    return 0, 0


def node_costs(ir: GraphIR) -> Dict[int, Tuple[int, int]]:
    return {node.id: node_cost(ir, node) for node in ir.nodes if not node.removable}


def estimate(ir: GraphIR) -> Tuple[int, int]:
    """
    Analytic decoder cost, summed over the non removable nodes, at the source resolutions the graph was built for.

    Returns:
        Tuple[int, int]: (params, madds)
    """
    costs = node_costs(ir).values()
    return sum(c[0] for c in costs), sum(c[1] for c in costs)


def output_resolution(ir: GraphIR, input_desc: FeatureDesc) -> Tuple[int, int, int]:
    """
    Decoder native output size of the main classifier.

    Returns:
        Tuple[int, int, int]: (height, width, stride relative to input_desc)
    """
    out = ir.node(ir.main_output).out_desc
    return out.height, out.width, input_desc.height // out.height


def export_dot(ir: GraphIR, name: str = "decoder") -> str:
    """
    Returns a deterministic DOT digraph of the decoder, auxiliary nodes dashed.
    """
    dot = Digraph(name, graph_attr={"rankdir": "TB"}, node_attr={"shape": "box"})

    for node in ir.nodes:
        desc = node.out_desc
        label = f"{node.id}: {node.label}\\n{desc.channels}x{desc.height}x{desc.width}"
        attrs = {"style": "dashed"} if node.removable else {}
        dot.node(str(node.id), label=label, **attrs)

    for node in ir.nodes:
        for source in node.inputs:
            attrs = {"style": "dashed"} if node.removable else {}
            dot.edge(str(source), str(node.id), **attrs)

    return dot.source


def dump(ir: GraphIR) -> str:
    """
    Line oriented debug text, one node per line: id, kind, op, inputs, desc, removable.
    """
    lines = []
    for node in ir.nodes:
        d = node.out_desc
        op = "-" if node.op is None else OPERATIONS[node.op].name
        inputs = ",".join(str(i) for i in node.inputs) or "-"
        lines.append(
            f"{node.id}\t{node.kind}\t{op}\t{inputs}\t{d.channels}x{d.height}x{d.width}/s{d.stride}\t{int(node.removable)}"
        )
    return "\n".join(lines)


if __name__ == "__main__":
    from auxcell.genome import ARCH0, decode
    from auxcell.graph.graph_builder import build
    from auxcell.utilities import setup_logging
    setup_logging(level="debug")

    sources = [FeatureDesc(c, 48 // s, 48 // s, s) for c, s in zip((8, 16, 24, 32), (2, 4, 8, 16))]
    arch0 = build(decode(ARCH0), sources, 16, 5)
    print(dump(arch0))
    print(estimate(arch0))
