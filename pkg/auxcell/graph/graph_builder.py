# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass, field, replace
from graphlib import CycleError, TopologicalSorter
from typing import Dict, List, Optional, Sequence, Tuple

from auxcell.ac_types import AuxCellException, AuxMode, NodeKind, ShapeError
from auxcell.genome import Genome, cell_pool_size, op_name


@dataclass(frozen=True)
class FeatureDesc:
    channels: int
    height: int
    width: int
    stride: int = 1

    def __post_init__(self):
        if min(self.channels, self.height, self.width) < 1:
            raise ShapeError(f"feature dimensions must be positive, got {self}")
        if self.stride < 1 or self.stride & (self.stride - 1):
            raise ShapeError(f"stride must be a power of two, got {self.stride}")

    def with_channels(self, channels: int) -> "FeatureDesc":
        return replace(self, channels=channels)

    @property
    def size(self) -> Tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True)
class GraphNode:
    """
    One node of the decoder graph. `op` is the operation code for cell operations,
    None otherwise. `removable` marks nodes on an auxiliary path.
    """

    id: int
    kind: NodeKind
    inputs: Tuple[int, ...]
    out_desc: FeatureDesc
    op: Optional[int] = None
    removable: bool = False
    name: str = ""

    @property
    def label(self) -> str:
        if self.op is not None:
            return f"{self.kind} {op_name(self.op)}"
        return self.kind


@dataclass(frozen=True)
class GraphIR:
    nodes: Tuple[GraphNode, ...]
    main_output: int
    aux_outputs: Tuple[int, ...]
    source_descs: Tuple[FeatureDesc, ...]
    block_outputs: Tuple[int, ...] = ()
    num_classes: int = 0
    adapt_channels: int = 0
    aux_mode: AuxMode = "none"
    _index: Dict[int, GraphNode] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self._index.update({node.id: node for node in self.nodes})

    def node(self, node_id: int) -> GraphNode:
        return self._index[node_id]

    @property
    def sources(self) -> List[GraphNode]:
        return [n for n in self.nodes if n.kind == "source"]

    @property
    def has_aux(self) -> bool:
        return len(self.aux_outputs) > 0


class _GraphWriter:
    """
    Appends nodes with increasing ids, so list order is a topological order.
    """

    def __init__(self):
        self.nodes: List[GraphNode] = []

    def add(self, kind: NodeKind, inputs: Sequence[int], out_desc: FeatureDesc, **kwargs) -> int:
        node_id = len(self.nodes)
        self.nodes.append(GraphNode(node_id, kind, tuple(inputs), out_desc, **kwargs))
        return node_id

    def desc(self, node_id: int) -> FeatureDesc:
        return self.nodes[node_id].out_desc

    def align(self, node_id: int, target: FeatureDesc, removable: bool, name: str) -> int:
        """Inserts a bilinear upsample node when node_id is smaller than target."""
        desc = self.desc(node_id)
        if desc.size == target.size:
            return node_id
        if desc.height > target.height or desc.width > target.width:
            raise ShapeError(f"cannot upsample {desc} down to {target}")
        return self.add(
            "upsample",
            [node_id],
            replace(target, channels=desc.channels),
            removable=removable,
            name=f"{name}.up",
        )

    def sum(self, operands: Sequence[int], removable: bool, name: str) -> int:
        # the largest operand (smallest stride) fixes the output size
        target = min((self.desc(i) for i in operands), key=lambda d: d.stride)
        channels = {self.desc(i).channels for i in operands}
        if len(channels) != 1:
            raise ShapeError(f"sum operands must share a channel count, got {sorted(channels)}")
        aligned = [self.align(i, target, removable, f"{name}.{k}") for k, i in enumerate(operands)]
        return self.add("sum", aligned, target, removable=removable, name=name)


def _build_cell(writer: _GraphWriter, genome: Genome, input_id: int, aux: bool, name: str) -> int:
    """
    Instantiates one copy of the cell on input_id and returns the id of the cell output.
    Cell pool: 0 input, 1 op0 output, then (op_a output, op_b output, sum) per branch.
    """
    kind: NodeKind = "aux-cell-op" if aux else "cell-op"
    desc = writer.desc(input_id)
    cell = genome.cell

    pool = [input_id]
    pool.append(writer.add(kind, [input_id], desc, op=cell.op0, removable=aux, name=f"{name}.op0"))

    sum_positions = []
    for b, branch in enumerate(cell.branches):
        out_a = writer.add(kind, [pool[branch.i_a]], desc, op=branch.op_a, removable=aux, name=f"{name}.b{b}.a")
        out_b = writer.add(kind, [pool[branch.i_b]], desc, op=branch.op_b, removable=aux, name=f"{name}.b{b}.b")
        branch_sum = writer.add("sum", [out_a, out_b], desc, removable=aux, name=f"{name}.b{b}.sum")
        pool.extend([out_a, out_b, branch_sum])
        sum_positions.append(len(pool) - 1)

    consumed = {i for branch in cell.branches for i in (branch.i_a, branch.i_b)}
    unconsumed = [pool[p] for p in sum_positions if p not in consumed]

    if len(unconsumed) == 1:
        return unconsumed[0]
    return writer.add("sum", unconsumed, desc, removable=aux, name=f"{name}.out")


def unconsumed_blocks(genome: Genome) -> List[int]:
    """Connectivity pool indices (4, 5, 6) of decoder blocks no later pair reads."""
    consumed = {i for pair in genome.connectivity.pairs for i in pair}
    return [4 + k for k in range(len(genome.connectivity.pairs)) if 4 + k not in consumed]


def unconsumed_branch_sums(genome: Genome) -> List[int]:
    """Cell pool indices (4, 7, 10) of branch sums no later branch reads."""
    consumed = {i for branch in genome.cell.branches for i in (branch.i_a, branch.i_b)}
    positions = [cell_pool_size(b) + 2 for b in range(len(genome.cell.branches))]
    return [p for p in positions if p not in consumed]


def build(
    genome: Genome,
    sources: Sequence[FeatureDesc],
    adapt_channels: int,
    num_classes: int,
    with_aux: bool = True,
    aux_mode: AuxMode = "cell",
) -> GraphIR:
    """
    Instantiates a genome as a decoder graph over the four encoder outputs.

    Args:
        genome: the architecture.
        sources: encoder feature descriptions ordered shallow to deep.
        adapt_channels: width of the adapt 1x1 convolutions, shared by every cell and the fuse conv.
        num_classes: classifier outputs.
        with_aux: attach intermediate supervision after each block sum.
        aux_mode: "cell" puts an auxiliary cell before each aux classifier, "classifier" only the classifier.

    Returns:
        GraphIR: nodes in topological order. The auxiliary nodes come after the main
            classifier, so main path node ids do not depend on with_aux.
    """
    if len(sources) != 4:
        raise ShapeError(f"expected 4 encoder outputs, got {len(sources)}")
    for shallow, deep in zip(sources, sources[1:]):
        if deep.height > shallow.height or deep.width > shallow.width:
            raise ShapeError("encoder outputs must be ordered shallow to deep")

    if not with_aux or aux_mode == "none":
        with_aux, aux_mode = False, "none"

    writer = _GraphWriter()
    source_ids = [writer.add("source", [], desc, name=f"source{i}") for i, desc in enumerate(sources)]

    pool = [
        writer.add("adapt-1x1", [sid], sources[i].with_channels(adapt_channels), name=f"adapt{i}")
        for i, sid in enumerate(source_ids)
    ]

    block_ids = []
    for k, (a, b) in enumerate(genome.connectivity.pairs):
        cell_a = _build_cell(writer, genome, pool[a], aux=False, name=f"block{k}.cell_a")
        cell_b = _build_cell(writer, genome, pool[b], aux=False, name=f"block{k}.cell_b")
        block_sum = writer.sum([cell_a, cell_b], removable=False, name=f"block{k}.sum")
        pool.append(block_sum)
        block_ids.append(block_sum)

    heads = [pool[i] for i in unconsumed_blocks(genome)]
    target = min((writer.desc(i) for i in heads), key=lambda d: d.stride)
    aligned = [writer.align(i, target, False, f"head.{j}") for j, i in enumerate(heads)]

    concat_desc = target.with_channels(sum(writer.desc(i).channels for i in aligned))
    concat = writer.add("concat", aligned, concat_desc, name="head.concat") if len(aligned) > 1 else aligned[0]
    fuse = writer.add("fuse-1x1", [concat], target.with_channels(adapt_channels), name="head.fuse")
    main_output = writer.add("classifier", [fuse], target.with_channels(num_classes), name="head.classifier")

    aux_outputs = []
    if with_aux:
        for k, block_sum in enumerate(block_ids):
            feature = block_sum
            if aux_mode == "cell":
                feature = _build_cell(writer, genome, block_sum, aux=True, name=f"aux{k}.cell")
            aux_outputs.append(
                writer.add(
                    "aux-classifier",
                    [feature],
                    writer.desc(feature).with_channels(num_classes),
                    removable=True,
                    name=f"aux{k}.classifier",
                )
            )

    ir = GraphIR(
        nodes=tuple(writer.nodes),
        main_output=main_output,
        aux_outputs=tuple(aux_outputs),
        source_descs=tuple(sources),
        block_outputs=tuple(block_ids),
        num_classes=num_classes,
        adapt_channels=adapt_channels,
        aux_mode=aux_mode,
    )
    check_acyclic(ir)
    logging.debug(f"Built graph with {len(ir.nodes)} nodes, {len(aux_outputs)} aux outputs, aux_mode={aux_mode}")
    return ir


def check_acyclic(ir: GraphIR) -> List[int]:
    """
    Topologically sorts the graph and checks that every input precedes its consumer.

    Returns:
        List[int]: a topological order of the node ids.
    """
    sorter = TopologicalSorter({node.id: set(node.inputs) for node in ir.nodes})
    try:
        order = list(sorter.static_order())
    except CycleError as e:
        raise AuxCellException(f"decoder graph has a cycle: {e.args[1]}") from e

    position = {node.id: i for i, node in enumerate(ir.nodes)}
    for node in ir.nodes:
        if any(position[i] >= position[node.id] for i in node.inputs):
            raise AuxCellException(f"node {node.id} reads an input that does not precede it")
    return order


def strip_aux(ir: GraphIR) -> GraphIR:
    """
    Deletes every removable node. Node ids of the remaining graph are unchanged.
    """
    kept = tuple(node for node in ir.nodes if not node.removable)
    if len(kept) == len(ir.nodes) and not ir.aux_outputs:
        return ir
    return replace(ir, nodes=kept, aux_outputs=(), aux_mode="none", _index={})
