# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""


class AuxCellException(Exception):
    """
    Custom AuxCell Exception
    """

    def __init__(self, message):
        # Call the base class constructor with the parameters it needs
        super().__init__(message)


class GenomeParseError(AuxCellException):
    """Raised when a genome text is not a well formed nested integer list."""


class GenomeRangeError(AuxCellException):
    """Raised when a genome index or operation code is outside its valid range."""


class ShapeError(AuxCellException):
    """Raised on tensor shape mismatches, a programming error."""


class NonFiniteError(AuxCellException):
    """Raised when a loss or activation becomes NaN or infinite during training."""


class PolyakStateError(AuxCellException):
    """Raised when Polyak weights are swapped in twice, or swapped out without a swap in."""


class CheckpointError(AuxCellException):
    """Raised on corrupted manifests, version mismatches and cache fingerprint mismatches."""


class MetricError(AuxCellException):
    """Raised when a metric is undefined for its input."""


class TeacherTrainingError(AuxCellException):
    """Raised when the distillation teacher does not reach the required holdout reward."""


class SearchLogError(AuxCellException):
    """Raised on truncated or malformed search logs."""


class ConfigError(AuxCellException):
    """Raised on invalid run configuration that pydantic cannot express."""


class LabelRangeError(AuxCellException):
    """Raised when a target mask holds a class id outside [0, num_classes) that is not the ignore label."""
