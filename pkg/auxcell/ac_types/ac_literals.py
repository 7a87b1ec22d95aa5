# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""


from typing import Literal

# Operation abbreviations, in operation code order:
OpName = Literal[
    "conv1x1",
    "conv3x3",
    "sep3x3",
    "sep5x5",
    "gap",
    "conv3x3 rate 3",
    "conv3x3 rate 12",
    "sep3x3 rate 3",
    "sep5x5 rate 6",
    "skip",
    "zero",
]

NodeKind = Literal[
    "source",
    "adapt-1x1",
    "cell-op",
    "sum",
    "concat",
    "fuse-1x1",
    "classifier",
    "aux-cell-op",
    "aux-classifier",
    "upsample",
]

# Kind of intermediate supervision attached after each decoder block
AuxMode = Literal["cell", "classifier", "none"]

SearchMode = Literal["rl", "random"]

RunMode = Literal["train", "eval"]

PSchedule = Literal["linear", "constant"]

KdSource = Literal["cached", "online"]

DType = Literal["float32", "float64"]

LogLevel = Literal["debug", "info", "warning", "error"]
