# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

from typing import Iterable

import numpy as np

from auxcell.nn.params import ParamSlot


def step_sgd_momentum(slots: Iterable[ParamSlot], lr: float, momentum: float = 0.9) -> None:
    """
    v <- momentum * v + grad; value <- value - lr * v
    """
    for slot in slots:
        velocity = slot.state.get("velocity")
        if velocity is None:
            velocity = np.zeros_like(slot.value)
        velocity = momentum * velocity + slot.grad
        slot.state["velocity"] = velocity
        slot.value -= (lr * velocity).astype(slot.value.dtype, copy=False)


def step_adam(
    slots: Iterable[ParamSlot], lr: float, beta1: float = 0.9, beta2: float = 0.99, eps: float = 1e-3
) -> None:
    """
    Bias corrected Adam. The step counter is kept per slot, so a slot added later starts at step 1.
    """
    for slot in slots:
        m = slot.state.get("m")
        if m is None:
            m = np.zeros_like(slot.value)
            slot.state["v"] = np.zeros_like(slot.value)
            slot.state["t"] = np.zeros((), dtype=np.int64)

        t = int(slot.state["t"]) + 1
        m = beta1 * m + (1.0 - beta1) * slot.grad
        v = beta2 * slot.state["v"] + (1.0 - beta2) * slot.grad**2
        slot.state["m"], slot.state["v"], slot.state["t"] = m, v, np.asarray(t, dtype=np.int64)

        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        slot.value -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(slot.value.dtype, copy=False)
