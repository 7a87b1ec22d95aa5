# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""


import math
from typing import Dict, List, Literal, Optional
from pydantic import BaseModel, Field, field_validator

from .ac_literals import AuxMode, SearchMode


class MetricsModel(BaseModel):
    """
    Segmentation quality of one evaluation, background excluded.
    """

    miou: float
    fwiou: float
    mpa: float
    reward: float

    def __getitem__(self, key):
        return getattr(self, key)

    def get(self, key, default=None):
        return getattr(self, key, default)


class LossSpec(BaseModel):
    """
    Coefficients of the auxiliary and distillation loss terms.
    """

    kd_coeff: float = 0.3
    aux_coeffs: List[float] = Field(default_factory=lambda: [0.3, 0.3, 0.3])

    @field_validator("kd_coeff")
    @classmethod
    def _kd_finite(cls, value: float) -> float:
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"kd_coeff must be finite and non negative, got {value}")
        return value

    @field_validator("aux_coeffs")
    @classmethod
    def _aux_finite(cls, value: List[float]) -> List[float]:
        for coeff in value:
            if not math.isfinite(coeff) or coeff < 0:
                raise ValueError(f"aux coefficients must be finite and non negative, got {coeff}")
        return value


class AblationFlagsModel(BaseModel):
    polyak: bool = True
    kd: bool = True
    aux_mode: AuxMode = "cell"


class SearchHeaderModel(BaseModel):
    """
    First line of every search log: the effective settings of the run.
    """

    kind: Literal["header"] = "header"
    mode: SearchMode
    seed: int
    settings: Dict


class SearchRecordModel(BaseModel):
    """
    One sampled architecture, one line of the JSONL search log.
    """

    kind: Literal["architecture"] = "architecture"
    index: int
    genome: str
    reward1: float
    continued: bool
    reward2: Optional[float] = None
    final_reward: float
    p_at_decision: float
    seconds_stage1: float
    seconds_stage2: float = 0.0
    mode: SearchMode
    ablation: AblationFlagsModel = Field(default_factory=AblationFlagsModel)
    failed: bool = False
    token_logprobs: Optional[List[float]] = None
    running_mean: float = 0.0
    metrics1: Optional[MetricsModel] = None
    metrics2: Optional[MetricsModel] = None

    def __getitem__(self, key):
        return getattr(self, key)

    def get(self, key, default=None):
        return getattr(self, key, default)
