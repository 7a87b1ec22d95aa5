# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from auxcell.ac_types import RunMode
from auxcell.genome import OPERATIONS
from auxcell.graph import GraphNode
from auxcell.nn import functional as F
from auxcell.nn.params import ParamStore


@dataclass(frozen=True)
class LayerContext:
    """
    How batch norm behaves in one forward pass. In eval mode, or with frozen statistics,
    the running statistics normalise and are left untouched.
    """

    mode: RunMode = "train"
    momentum: float = 0.1
    eps: float = 1e-5
    freeze_bn: bool = False

    @property
    def batch_stats(self) -> bool:
        return self.mode == "train" and not self.freeze_bn


def xavier_uniform(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, fan_out: int, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


# Parameter layout


def add_conv(store: ParamStore, name: str, rng, c_in: int, c_out: int, kernel: int, dtype, group: str) -> None:
    fan_in, fan_out = c_in * kernel * kernel, c_out * kernel * kernel
    store.add(name, xavier_uniform(rng, (c_out, c_in, kernel, kernel), fan_in, fan_out, dtype), group)


def add_depthwise(store: ParamStore, name: str, rng, channels: int, kernel: int, dtype, group: str) -> None:
    store.add(name, xavier_uniform(rng, (channels, 1, kernel, kernel), kernel * kernel, kernel * kernel, dtype), group)


def add_batch_norm(store: ParamStore, prefix: str, channels: int, dtype, group: str) -> None:
    store.add(f"{prefix}.gamma", np.ones(channels, dtype=dtype), group)
    store.add(f"{prefix}.beta", np.zeros(channels, dtype=dtype), group)
    store.add_buffer(f"{prefix}.mean", np.zeros(channels, dtype=dtype))
    store.add_buffer(f"{prefix}.var", np.ones(channels, dtype=dtype))


def init_node(store: ParamStore, node: GraphNode, c_in: int, rng: np.random.Generator, dtype, group: str = "decoder") -> None:
    """
    Creates the parameters of one graph node, named n<id>.<part>.
    """
    p = f"n{node.id}"
    c_out = node.out_desc.channels

    if node.kind in ("adapt-1x1", "fuse-1x1"):
        add_conv(store, f"{p}.w", rng, c_in, c_out, 1, dtype, group)
        add_batch_norm(store, f"{p}.bn", c_out, dtype, group)

    elif node.kind in ("classifier", "aux-classifier"):
        add_conv(store, f"{p}.w", rng, c_in, c_out, 1, dtype, group)
        store.add(f"{p}.b", np.zeros(c_out, dtype=dtype), group)

    elif node.kind in ("cell-op", "aux-cell-op"):
        spec = OPERATIONS[node.op]
        if spec.kind == "conv":
            add_conv(store, f"{p}.w", rng, c_in, c_out, spec.kernel, dtype, group)
            add_batch_norm(store, f"{p}.bn", c_out, dtype, group)
        elif spec.kind == "sep":
            add_depthwise(store, f"{p}.dw", rng, c_in, spec.kernel, dtype, group)
            add_batch_norm(store, f"{p}.dw_bn", c_in, dtype, group)
            add_conv(store, f"{p}.pw", rng, c_in, c_out, 1, dtype, group)
            add_batch_norm(store, f"{p}.pw_bn", c_out, dtype, group)
        elif spec.kind == "gap":
            add_conv(store, f"{p}.w", rng, c_in, c_out, 1, dtype, group)
            add_batch_norm(store, f"{p}.bn", c_out, dtype, group)


# Building blocks


def batch_norm_forward(store: ParamStore, prefix: str, x: np.ndarray, ctx: LayerContext) -> Tuple[np.ndarray, Dict]:
    gamma, beta = store[f"{prefix}.gamma"], store[f"{prefix}.beta"]
    if ctx.batch_stats:
        y, cache, mean, var = F.batch_norm_train(x, gamma, beta, ctx.eps)
        running_mean, running_var = store.buffers[f"{prefix}.mean"], store.buffers[f"{prefix}.var"]
        running_mean *= 1.0 - ctx.momentum
        running_mean += ctx.momentum * mean
        running_var *= 1.0 - ctx.momentum
        running_var += ctx.momentum * var
        return y, cache
    return F.batch_norm_eval(x, gamma, beta, store.buffers[f"{prefix}.mean"], store.buffers[f"{prefix}.var"], ctx.eps)


def batch_norm_backward(store: ParamStore, prefix: str, dy: np.ndarray, cache: Dict) -> np.ndarray:
    dx, dgamma, dbeta = F.batch_norm_backward(dy, cache)
    store.accumulate(f"{prefix}.gamma", dgamma.astype(dy.dtype, copy=False))
    store.accumulate(f"{prefix}.beta", dbeta.astype(dy.dtype, copy=False))
    return dx


def conv_bn_relu_forward(
    store: ParamStore, prefix: str, x: np.ndarray, dilation: int, ctx: LayerContext, weight: str = "w", bn: str = "bn"
) -> Tuple[np.ndarray, Dict]:
    z = F.conv2d(x, store[f"{prefix}.{weight}"], dilation)
    b, bn_cache = batch_norm_forward(store, f"{prefix}.{bn}", z, ctx)
    y = F.relu(b)
    return y, {"x": x, "bn": bn_cache, "y": y, "dilation": dilation}


def conv_bn_relu_backward(
    store: ParamStore, prefix: str, dy: np.ndarray, cache: Dict, weight: str = "w", bn: str = "bn"
) -> np.ndarray:
    db = F.relu_backward(dy, cache["y"])
    dz = batch_norm_backward(store, f"{prefix}.{bn}", db, cache["bn"])
    dx, dw = F.conv2d_backward(dz, cache["x"], store[f"{prefix}.{weight}"], cache["dilation"])
    store.accumulate(f"{prefix}.{weight}", dw)
    return dx


def separable_forward(store: ParamStore, prefix: str, x: np.ndarray, dilation: int, ctx: LayerContext) -> Tuple[np.ndarray, Dict]:
    """depthwise -> BN -> pointwise -> BN -> ReLU"""
    d = F.depthwise_conv2d(x, store[f"{prefix}.dw"], dilation)
    d_bn, dw_bn_cache = batch_norm_forward(store, f"{prefix}.dw_bn", d, ctx)
    y, pw_cache = conv_bn_relu_forward(store, prefix, d_bn, 1, ctx, weight="pw", bn="pw_bn")
    return y, {"x": x, "dw_bn": dw_bn_cache, "pw": pw_cache, "dilation": dilation}


def separable_backward(store: ParamStore, prefix: str, dy: np.ndarray, cache: Dict) -> np.ndarray:
    d_bn = conv_bn_relu_backward(store, prefix, dy, cache["pw"], weight="pw", bn="pw_bn")
    dd = batch_norm_backward(store, f"{prefix}.dw_bn", d_bn, cache["dw_bn"])
    dx, dw = F.depthwise_conv2d_backward(dd, cache["x"], store[f"{prefix}.dw"], cache["dilation"])
    store.accumulate(f"{prefix}.dw", dw)
    return dx


def gap_forward(store: ParamStore, prefix: str, x: np.ndarray, ctx: LayerContext) -> Tuple[np.ndarray, Dict]:
    """global average pool -> conv 1x1 -> BN -> ReLU -> upsample (a broadcast from 1x1)"""
    pooled = F.global_avg_pool(x)
    r, inner = conv_bn_relu_forward(store, prefix, pooled, 1, ctx)
    y = np.broadcast_to(r, x.shape).copy()
    return y, {"inner": inner, "size": x.shape[2:]}


def gap_backward(store: ParamStore, prefix: str, dy: np.ndarray, cache: Dict) -> np.ndarray:
    dr = dy.sum(axis=(2, 3), keepdims=True)
    dpooled = conv_bn_relu_backward(store, prefix, dr, cache["inner"])
    return F.global_avg_pool_backward(dpooled, *cache["size"])


def classifier_forward(store: ParamStore, prefix: str, x: np.ndarray) -> Tuple[np.ndarray, Dict]:
    w, b = store[f"{prefix}.w"], store[f"{prefix}.b"]
    y = np.einsum("nchw,oc->nohw", x, w[:, :, 0, 0], optimize=True) + b[None, :, None, None]
    return y, {"x": x}


def classifier_backward(store: ParamStore, prefix: str, dy: np.ndarray, cache: Dict) -> np.ndarray:
    w = store[f"{prefix}.w"]
    store.accumulate(f"{prefix}.w", np.einsum("nohw,nchw->oc", dy, cache["x"], optimize=True)[:, :, None, None])
    store.accumulate(f"{prefix}.b", dy.sum(axis=(0, 2, 3)))
    return np.einsum("nohw,oc->nchw", dy, w[:, :, 0, 0], optimize=True)


# Graph nodes


def forward_node(
    store: ParamStore, node: GraphNode, inputs: List[np.ndarray], ctx: LayerContext
) -> Tuple[np.ndarray, Optional[Dict]]:
    p = f"n{node.id}"

    if node.kind in ("adapt-1x1", "fuse-1x1"):
        return conv_bn_relu_forward(store, p, inputs[0], 1, ctx)

    if node.kind in ("classifier", "aux-classifier"):
        return classifier_forward(store, p, inputs[0])

    if node.kind == "sum":
        out = inputs[0].copy()
        for x in inputs[1:]:
            out += x
        return out, None

    if node.kind == "concat":
        return np.concatenate(inputs, axis=1), {"splits": [x.shape[1] for x in inputs]}

    if node.kind == "upsample":
        x = inputs[0]
        return F.bilinear_upsample(x, node.out_desc.height, node.out_desc.width), {"size": x.shape[2:]}

    # cell operations
    x = inputs[0]
    spec = OPERATIONS[node.op]
    if spec.kind == "conv":
        return conv_bn_relu_forward(store, p, x, spec.dilation, ctx)
    if spec.kind == "sep":
        return separable_forward(store, p, x, spec.dilation, ctx)
    if spec.kind == "gap":
        return gap_forward(store, p, x, ctx)
    if spec.kind == "skip":
        return x, None
    return np.zeros_like(x), None


def backward_node(store: ParamStore, node: GraphNode, dy: np.ndarray, cache: Optional[Dict]) -> List[Optional[np.ndarray]]:
    """
    Accumulates parameter gradients and returns one gradient per input, None where nothing flows.
    """
    p = f"n{node.id}"

    if node.kind in ("adapt-1x1", "fuse-1x1"):
        return [conv_bn_relu_backward(store, p, dy, cache)]

    if node.kind in ("classifier", "aux-classifier"):
        return [classifier_backward(store, p, dy, cache)]

    if node.kind == "sum":
        return [dy for _ in node.inputs]

    if node.kind == "concat":
        bounds = np.cumsum(cache["splits"])[:-1]
        return list(np.split(dy, bounds, axis=1))

    if node.kind == "upsample":
        return [F.bilinear_upsample_backward(dy, *cache["size"])]

    spec = OPERATIONS[node.op]
    if spec.kind == "conv":
        return [conv_bn_relu_backward(store, p, dy, cache)]
    if spec.kind == "sep":
        return [separable_backward(store, p, dy, cache)]
    if spec.kind == "gap":
        return [gap_backward(store, p, dy, cache)]
    if spec.kind == "skip":
        return [dy]
    return [None]
