# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024

    Forward and backward kernels on NCHW numpy arrays. Every forward returns
    its output and the cache its backward needs; every backward returns the
    input gradient followed by the parameter gradients.
"""

from functools import lru_cache
from typing import Dict, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from auxcell.ac_types import LabelRangeError, ShapeError


def same_padding(kernel: int, dilation: int) -> int:
    return dilation * (kernel - 1) // 2


def _taps(kernel: int):
    for i in range(kernel):
        for j in range(kernel):
            yield i, j


def conv2d(x: np.ndarray, w: np.ndarray, dilation: int = 1) -> np.ndarray:
    """
    Stride 1 same padded convolution, w of shape (C_out, C_in, k, k).
    Accumulates one einsum per kernel tap over shifted windows of the padded input.
    """
    n, c, h, wd = x.shape
    c_out, c_in, k, _ = w.shape
    if c != c_in:
        raise ShapeError(f"conv2d expects {c_in} input channels, got {c}")

    pad = same_padding(k, dilation)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    y = np.zeros((n, c_out, h, wd), dtype=x.dtype)
    for i, j in _taps(k):
        window = xp[:, :, i * dilation : i * dilation + h, j * dilation : j * dilation + wd]
        y += np.einsum("nchw,oc->nohw", window, w[:, :, i, j], optimize=True)
    return y


def conv2d_backward(dy: np.ndarray, x: np.ndarray, w: np.ndarray, dilation: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    n, c, h, wd = x.shape
    k = w.shape[2]
    pad = same_padding(k, dilation)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    for i, j in _taps(k):
        rows = slice(i * dilation, i * dilation + h)
        cols = slice(j * dilation, j * dilation + wd)
        dw[:, :, i, j] = np.einsum("nohw,nchw->oc", dy, xp[:, :, rows, cols], optimize=True)
        dxp[:, :, rows, cols] += np.einsum("nohw,oc->nchw", dy, w[:, :, i, j], optimize=True)
    return dxp[:, :, pad : pad + h, pad : pad + wd], dw


def depthwise_conv2d(x: np.ndarray, w: np.ndarray, dilation: int = 1) -> np.ndarray:
    """Per-channel same padded convolution, w of shape (C, 1, k, k)."""
    n, c, h, wd = x.shape
    if w.shape[0] != c:
        raise ShapeError(f"depthwise conv expects {w.shape[0]} channels, got {c}")
    k = w.shape[2]
    pad = same_padding(k, dilation)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    y = np.zeros_like(x)
    for i, j in _taps(k):
        window = xp[:, :, i * dilation : i * dilation + h, j * dilation : j * dilation + wd]
        y += window * w[:, 0, i, j][None, :, None, None]
    return y


def depthwise_conv2d_backward(
    dy: np.ndarray, x: np.ndarray, w: np.ndarray, dilation: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    n, c, h, wd = x.shape
    k = w.shape[2]
    pad = same_padding(k, dilation)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    dxp = np.zeros_like(xp)
    dw = np.zeros_like(w)
    for i, j in _taps(k):
        rows = slice(i * dilation, i * dilation + h)
        cols = slice(j * dilation, j * dilation + wd)
        dw[:, 0, i, j] = np.einsum("nchw,nchw->c", dy, xp[:, :, rows, cols], optimize=True)
        dxp[:, :, rows, cols] += dy * w[:, 0, i, j][None, :, None, None]
    return dxp[:, :, pad : pad + h, pad : pad + wd], dw


def batch_norm_train(
    x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float
) -> Tuple[np.ndarray, Dict, np.ndarray, np.ndarray]:
    """
    Batch statistics normalisation over N, H, W.

    Returns:
        (y, cache, batch mean, unbiased batch variance) the last two feed the running statistics.
    """
    axes = (0, 2, 3)
    mean = x.mean(axis=axes)
    var = x.var(axis=axes)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
    y = gamma[None, :, None, None] * x_hat + beta[None, :, None, None]

    count = x.shape[0] * x.shape[2] * x.shape[3]
    unbiased = var * count / max(count - 1, 1)
    return y, {"x_hat": x_hat, "inv_std": inv_std, "gamma": gamma, "batch": True}, mean, unbiased


def batch_norm_eval(
    x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, running_mean: np.ndarray, running_var: np.ndarray, eps: float
) -> Tuple[np.ndarray, Dict]:
    inv_std = 1.0 / np.sqrt(running_var + eps)
    x_hat = (x - running_mean[None, :, None, None]) * inv_std[None, :, None, None]
    y = gamma[None, :, None, None] * x_hat + beta[None, :, None, None]
    return y.astype(x.dtype, copy=False), {"x_hat": x_hat, "inv_std": inv_std, "gamma": gamma, "batch": False}


def batch_norm_backward(dy: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x_hat, inv_std, gamma = cache["x_hat"], cache["inv_std"], cache["gamma"]
    axes = (0, 2, 3)
    dgamma = (dy * x_hat).sum(axis=axes)
    dbeta = dy.sum(axis=axes)
    dx_hat = dy * gamma[None, :, None, None]

    if not cache["batch"]:
        # fixed statistics: an affine map
        return dx_hat * inv_std[None, :, None, None], dgamma, dbeta

    dx = (
        dx_hat
        - dx_hat.mean(axis=axes, keepdims=True)
        - x_hat * (dx_hat * x_hat).mean(axis=axes, keepdims=True)
    ) * inv_std[None, :, None, None]
    return dx, dgamma, dbeta


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(dy: np.ndarray, y: np.ndarray) -> np.ndarray:
    return dy * (y > 0)


@lru_cache(maxsize=256)
def interpolation_matrix(in_size: int, out_size: int, dtype_name: str = "float64") -> np.ndarray:
    """
    Row i holds the linear interpolation weights of output pixel i over the input pixels,
    half pixel centers (align_corners=False), borders clamped.
    """
    matrix = np.zeros((out_size, in_size), dtype=np.float64)
    scale = in_size / out_size
    for i in range(out_size):
        src = max((i + 0.5) * scale - 0.5, 0.0)
        i0 = min(int(np.floor(src)), in_size - 1)
        i1 = min(i0 + 1, in_size - 1)
        frac = src - i0
        matrix[i, i0] += 1.0 - frac
        matrix[i, i1] += frac
    matrix = matrix.astype(dtype_name)
    matrix.setflags(write=False)
    return matrix


def bilinear_upsample(x: np.ndarray, height: int, width: int) -> np.ndarray:
    """
    Bilinear resize to (height, width). Same size returns the input unchanged.
    """
    if x.shape[2:] == (height, width):
        return x
    rows = interpolation_matrix(x.shape[2], height, x.dtype.name)
    cols = interpolation_matrix(x.shape[3], width, x.dtype.name)
    return np.einsum("ih,nchw,jw->ncij", rows, x, cols, optimize=True)


def bilinear_upsample_backward(dy: np.ndarray, in_height: int, in_width: int) -> np.ndarray:
    if dy.shape[2:] == (in_height, in_width):
        return dy
    rows = interpolation_matrix(in_height, dy.shape[2], dy.dtype.name)
    cols = interpolation_matrix(in_width, dy.shape[3], dy.dtype.name)
    return np.einsum("ih,ncij,jw->nchw", rows, dy, cols, optimize=True)


def global_avg_pool(x: np.ndarray) -> np.ndarray:
    return x.mean(axis=(2, 3), keepdims=True)


def global_avg_pool_backward(dy: np.ndarray, height: int, width: int) -> np.ndarray:
    return np.broadcast_to(dy / (height * width), dy.shape[:2] + (height, width)).copy()


def avg_pool2(x: np.ndarray) -> np.ndarray:
    """2x2 average pooling with stride 2, even spatial sizes only."""
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"avg_pool2 needs even spatial sizes, got {h}x{w}")
    return x.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))


def avg_pool2_backward(dy: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(dy, 2, axis=2), 2, axis=3) / 4.0


def cross_entropy(
    logits: np.ndarray, target: np.ndarray, ignore_index: int = 255
) -> Tuple[float, np.ndarray]:
    """
    Mean softmax cross entropy over the pixels whose label is not ignore_index.

    Args:
        logits: (N, K, H, W)
        target: (N, H, W) integer class ids

    Returns:
        (loss, dlogits)
    """
    num_classes = logits.shape[1]
    if logits.shape[0] != target.shape[0] or logits.shape[2:] != target.shape[1:]:
        raise ShapeError(f"logits {logits.shape} do not match target {target.shape}")

    valid = target != ignore_index
    if np.any(target[valid] < 0) or np.any(target[valid] >= num_classes):
        raise LabelRangeError(f"target holds class ids outside [0, {num_classes})")

    count = int(valid.sum())
    if count == 0:
        return 0.0, np.zeros_like(logits)

    labels = np.where(valid, target, 0)
    log_probs = log_softmax(logits, axis=1)
    picked = np.take_along_axis(log_probs, labels[:, None, :, :], axis=1)[:, 0]
    loss = -float(picked[valid].sum()) / count

    dlogits = softmax(logits, axis=1)
    np.put_along_axis(
        dlogits, labels[:, None, :, :], np.take_along_axis(dlogits, labels[:, None, :, :], axis=1) - 1.0, axis=1
    )
    dlogits *= valid[:, None, :, :] / count
    return loss, dlogits.astype(logits.dtype, copy=False)


def mse(student: np.ndarray, teacher: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean over all elements of the squared difference, and its gradient w.r.t. student."""
    if student.shape != teacher.shape:
        raise ShapeError(f"student logits {student.shape} do not match teacher logits {teacher.shape}")
    diff = student - teacher
    return float(np.mean(diff**2)), (2.0 / diff.size) * diff
