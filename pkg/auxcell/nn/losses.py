# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from auxcell.ac_types import LossSpec, ShapeError
from auxcell.nn import functional as F


@dataclass
class LossResult:
    """
    Total loss, its per term breakdown, and the gradients w.r.t. the decoder-resolution logits.
    """

    total: float
    terms: Dict[str, float]
    d_main: np.ndarray
    d_aux: List[np.ndarray] = field(default_factory=list)


def upsample_to_mask(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return F.bilinear_upsample(logits, mask.shape[-2], mask.shape[-1])


def loss(
    main_logits: np.ndarray,
    aux_logits: Sequence[np.ndarray],
    target: np.ndarray,
    teacher_logits: Optional[np.ndarray] = None,
    spec: Optional[LossSpec] = None,
    ignore_index: int = 255,
) -> LossResult:
    """
    total = CE(main) + sum_k aux_coeffs[k] * CE(aux_k) + kd_coeff * MSE(main, teacher)

    Every logit map is bilinearly upsampled to the mask size first. The teacher logits are
    expected at mask resolution; the KD term is left out when they are None.
    """
    spec = spec if spec is not None else LossSpec()
    if aux_logits and len(spec.aux_coeffs) < len(aux_logits):
        raise ShapeError(f"{len(aux_logits)} aux outputs but only {len(spec.aux_coeffs)} aux coefficients")

    main_up = upsample_to_mask(main_logits, target)
    ce_main, d_main_up = F.cross_entropy(main_up, target, ignore_index)
    terms = {"ce": ce_main}
    total = ce_main

    if teacher_logits is not None and spec.kd_coeff > 0:
        kd, d_kd = F.mse(main_up, teacher_logits)
        terms["kd"] = kd
        total += spec.kd_coeff * kd
        d_main_up = d_main_up + spec.kd_coeff * d_kd.astype(d_main_up.dtype, copy=False)

    d_main = F.bilinear_upsample_backward(d_main_up, *main_logits.shape[2:])

    d_aux = []
    for k, (logits, coeff) in enumerate(zip(aux_logits, spec.aux_coeffs)):
        ce_aux, d_up = F.cross_entropy(upsample_to_mask(logits, target), target, ignore_index)
        terms[f"aux{k}"] = ce_aux
        total += coeff * ce_aux
        d_aux.append(F.bilinear_upsample_backward(coeff * d_up, *logits.shape[2:]))

    terms["total"] = total
    return LossResult(total, terms, d_main, d_aux)
