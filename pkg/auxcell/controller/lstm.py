# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024

    LSTM layer with a manual backward pass. One weight matrix per layer of shape
    (1 + n_input + n_hidden, 4 * n_hidden): row 0 is the bias, gate blocks are
    ordered input, input gate, forget gate, output gate (IFOG).
"""

from typing import Dict, Optional, Tuple

import numpy as np


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def lstm_init(rng: np.random.Generator, n_input: int, n_hidden: int, init_range: float) -> np.ndarray:
    return rng.uniform(-init_range, init_range, size=(1 + n_input + n_hidden, 4 * n_hidden))


def lstm_step(x: np.ndarray, h: np.ndarray, c: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One time step for a (B, n_input) input; returns the new (h, c)."""
    n_hidden = h.shape[1]
    hin = np.concatenate([np.ones((x.shape[0], 1)), x, h], axis=1)
    ifog = hin @ w
    g = np.tanh(ifog[:, :n_hidden])
    gates = sigmoid(ifog[:, n_hidden:])
    c_new = g * gates[:, :n_hidden] + gates[:, n_hidden : 2 * n_hidden] * c
    h_new = np.tanh(c_new) * gates[:, 2 * n_hidden :]
    return h_new, c_new


def lstm_forward(
    x: np.ndarray, w: np.ndarray, h0: Optional[np.ndarray] = None, c0: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, Dict]:
    """
    Runs a (T, B, n_input) sequence through one layer.

    Returns:
        (Hout of shape (T, B, n_hidden), cache)
    """
    steps, batch, n_input = x.shape
    n_hidden = w.shape[1] // 4

    hin = np.zeros((steps, batch, 1 + n_input + n_hidden))
    ifog = np.zeros((steps, batch, 4 * n_hidden))
    ifogf = np.zeros((steps, batch, 4 * n_hidden))
    c = np.zeros((steps, batch, n_hidden))
    ct = np.zeros((steps, batch, n_hidden))
    hout = np.zeros((steps, batch, n_hidden))

    h0 = h0 if h0 is not None else np.zeros((batch, n_hidden))
    c0 = c0 if c0 is not None else np.zeros((batch, n_hidden))

    for t in range(steps):
        hin[t, :, 0] = 1
        hin[t, :, 1 : n_input + 1] = x[t]
        hin[t, :, n_input + 1 :] = h0 if t == 0 else hout[t - 1]

        ifog[t] = hin[t] @ w
        ifogf[t, :, :n_hidden] = np.tanh(ifog[t, :, :n_hidden])
        ifogf[t, :, n_hidden:] = sigmoid(ifog[t, :, n_hidden:])

        prev_c = c0 if t == 0 else c[t - 1]
        c[t] = ifogf[t, :, :n_hidden] * ifogf[t, :, n_hidden : 2 * n_hidden] + ifogf[t, :, 2 * n_hidden : 3 * n_hidden] * prev_c
        ct[t] = np.tanh(c[t])
        hout[t] = ct[t] * ifogf[t, :, 3 * n_hidden :]

    cache = {"hin": hin, "w": w, "hout": hout, "ifogf": ifogf, "c": c, "ct": ct, "c0": c0}
    return hout, cache


def lstm_backward(dhout_in: np.ndarray, cache: Dict) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        (dX of shape (T, B, n_input), dW)
    """
    w, hin, ifogf, c, ct, c0 = cache["w"], cache["hin"], cache["ifogf"], cache["c"], cache["ct"], cache["c0"]
    steps, batch, _ = hin.shape
    n_hidden = cache["hout"].shape[2]
    n_input = hin.shape[2] - n_hidden - 1

    difogf = np.zeros_like(ifogf)
    difog = np.zeros_like(ifogf)
    dw = np.zeros_like(w)
    dc = np.zeros_like(c)
    dx = np.zeros((steps, batch, n_input))
    dhout = dhout_in.copy()

    for t in reversed(range(steps)):
        difogf[t, :, 3 * n_hidden :] = ct[t] * dhout[t]
        dc[t] += (1 - ct[t] ** 2) * (ifogf[t, :, 3 * n_hidden :] * dhout[t])

        prev_c = c0 if t == 0 else c[t - 1]
        difogf[t, :, 2 * n_hidden : 3 * n_hidden] = dc[t] * prev_c
        if t > 0:
            dc[t - 1] += dc[t] * ifogf[t, :, 2 * n_hidden : 3 * n_hidden]

        difogf[t, :, :n_hidden] = dc[t] * ifogf[t, :, n_hidden : 2 * n_hidden]
        difogf[t, :, n_hidden : 2 * n_hidden] = dc[t] * ifogf[t, :, :n_hidden]

        difog[t, :, :n_hidden] = (1 - ifogf[t, :, :n_hidden] ** 2) * difogf[t, :, :n_hidden]
        y = ifogf[t, :, n_hidden:]
        difog[t, :, n_hidden:] = y * (1 - y) * difogf[t, :, n_hidden:]

        dw += hin[t].T @ difog[t]
        dhin = difog[t] @ w.T
        dx[t] = dhin[:, 1 : n_input + 1]
        if t > 0:
            dhout[t - 1] += dhin[:, n_input + 1 :]

    return dx, dw
