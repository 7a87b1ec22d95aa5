# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from auxcell.ac_types import NonFiniteError, RunMode, ShapeError
from auxcell.graph import GraphIR, strip_aux
from auxcell.nn.layers import LayerContext, backward_node, forward_node, init_node
from auxcell.nn.params import ParamStore


def init_params(
    ir: GraphIR,
    rng: np.random.Generator,
    dtype=np.float32,
    store: Optional[ParamStore] = None,
    group: str = "decoder",
) -> ParamStore:
    """
    Xavier uniform initialisation of every parametric node, in node order.
    Auxiliary nodes come last, so for one seed the main path weights do not depend on the aux mode.
    """
    store = store if store is not None else ParamStore()
    for node in ir.nodes:
        if node.kind == "source":
            continue
        c_in = ir.node(node.inputs[0]).out_desc.channels
        init_node(store, node, c_in, rng, dtype, group)
    logging.debug(f"Initialised {store.parameter_count(group)} {group} parameters over {len(ir.nodes)} nodes")
    return store


@dataclass
class ForwardCache:
    ir: GraphIR
    ctx: LayerContext
    caches: Dict[int, Optional[Dict]] = field(default_factory=dict)
    source_shapes: List[Tuple[int, ...]] = field(default_factory=list)


def forward(
    ir: GraphIR,
    store: ParamStore,
    sources: Sequence[np.ndarray],
    mode: RunMode = "train",
    ctx: Optional[LayerContext] = None,
) -> Tuple[np.ndarray, List[np.ndarray], ForwardCache]:
    """
    Runs the decoder graph on the four encoder feature maps.

    Returns:
        (main logits, aux logits in block order, cache for backward) at decoder resolution.

    Raises:
        ShapeError: a source does not match its declared description.
        NonFiniteError: the logits hold NaN or infinite values.
    """
    ctx = ctx if ctx is not None else LayerContext(mode=mode)
    if ctx.mode != mode:
        ctx = LayerContext(mode, ctx.momentum, ctx.eps, ctx.freeze_bn)

    source_nodes = ir.sources
    if len(sources) != len(source_nodes):
        raise ShapeError(f"expected {len(source_nodes)} feature maps, got {len(sources)}")

    cache = ForwardCache(ir, ctx, source_shapes=[s.shape for s in sources])
    outputs: Dict[int, np.ndarray] = {}
    for node, x in zip(source_nodes, sources):
        d = node.out_desc
        if x.ndim != 4 or x.shape[1:] != (d.channels, d.height, d.width):
            raise ShapeError(f"feature map {node.name} has shape {x.shape}, expected (N, {d.channels}, {d.height}, {d.width})")
        outputs[node.id] = x

    for node in ir.nodes:
        if node.kind == "source":
            continue
        y, node_cache = forward_node(store, node, [outputs[i] for i in node.inputs], ctx)
        outputs[node.id] = y
        if mode == "train":
            cache.caches[node.id] = node_cache

    main = outputs[ir.main_output]
    aux = [outputs[i] for i in ir.aux_outputs]
    for logits in [main] + aux:
        if not np.all(np.isfinite(logits)):
            raise NonFiniteError("non finite logits in decoder forward")
    return main, aux, cache


def backward(
    cache: ForwardCache, store: ParamStore, d_main: np.ndarray, d_aux: Optional[Sequence[np.ndarray]] = None
) -> List[np.ndarray]:
    """
    Reverse mode pass over the graph, accumulating into the parameter gradients.

    Returns:
        List[np.ndarray]: gradients w.r.t. the four feature maps, for end to end training.
    """
    ir = cache.ir
    if not cache.caches and any(node.kind != "source" for node in ir.nodes):
        raise ShapeError("backward needs a forward pass in train mode")

    grads: Dict[int, np.ndarray] = {ir.main_output: d_main}
    for node_id, d in zip(ir.aux_outputs, d_aux or []):
        grads[node_id] = d

    for node in reversed(ir.nodes):
        if node.kind == "source" or node.id not in grads:
            continue
        dy = grads.pop(node.id)
        for input_id, dx in zip(node.inputs, backward_node(store, node, dy, cache.caches[node.id])):
            if dx is None:
                continue
            if input_id in grads:
                grads[input_id] = grads[input_id] + dx
            else:
                grads[input_id] = dx

    return [
        grads.get(node.id, np.zeros(shape, dtype=d_main.dtype))
        for node, shape in zip(ir.sources, cache.source_shapes)
    ]


class DecoderNet:
    """
    A decoder graph bound to its parameters and batch norm settings.
    """

    def __init__(self, ir: GraphIR, store: ParamStore, momentum: float = 0.1, eps: float = 1e-5):
        self.ir = ir
        self.store = store
        self.momentum = momentum
        self.eps = eps
        self.freeze_bn = False

    @classmethod
    def create(cls, ir: GraphIR, rng: np.random.Generator, dtype=np.float32, momentum: float = 0.1, eps: float = 1e-5):
        return cls(ir, init_params(ir, rng, dtype), momentum, eps)

    def context(self, mode: RunMode) -> LayerContext:
        return LayerContext(mode, self.momentum, self.eps, self.freeze_bn)

    def forward(self, sources: Sequence[np.ndarray], mode: RunMode = "train"):
        return forward(self.ir, self.store, sources, mode, self.context(mode))

    def backward(self, cache: ForwardCache, d_main: np.ndarray, d_aux: Optional[Sequence[np.ndarray]] = None):
        return backward(cache, self.store, d_main, d_aux)

    def predict(self, sources: Sequence[np.ndarray]) -> np.ndarray:
        main, _, _ = self.forward(sources, "eval")
        return main

    def strip_aux(self) -> "DecoderNet":
        """Same parameters, auxiliary nodes removed from the graph."""
        stripped = DecoderNet(strip_aux(self.ir), self.store, self.momentum, self.eps)
        stripped.freeze_bn = self.freeze_bn
        return stripped
