# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import math
from typing import Sequence

import numpy as np
from scipy.stats import spearmanr

from auxcell.ac_types import MetricError, MetricsModel, ShapeError


class ConfusionMatrix:
    """
    Pixel counts, rows are ground truth and columns predictions.
    Pixels labelled with ignore_index are never counted.
    """

    def __init__(self, num_classes: int, background: int = 0, ignore_index: int = 255):
        self.num_classes = num_classes
        self.background = background
        self.ignore_index = ignore_index
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    @classmethod
    def from_counts(cls, counts, background: int = 0) -> "ConfusionMatrix":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1] or np.any(counts < 0):
            raise MetricError("a confusion matrix is a square matrix of non negative counts")
        cm = cls(counts.shape[0], background)
        cm.counts = counts.copy()
        return cm

    def update(self, prediction: np.ndarray, target: np.ndarray) -> "ConfusionMatrix":
        """Adds the pixels of one batch of predicted and ground truth label maps."""
        if prediction.shape != target.shape:
            raise ShapeError(f"prediction {prediction.shape} and target {target.shape} differ")
        valid = target != self.ignore_index
        index = self.num_classes * target[valid].astype(np.int64) + prediction[valid].astype(np.int64)
        self.counts += np.bincount(index, minlength=self.num_classes**2).reshape(self.num_classes, self.num_classes)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if other.num_classes != self.num_classes:
            raise MetricError("cannot merge confusion matrices of different class counts")
        merged = ConfusionMatrix(self.num_classes, self.background, self.ignore_index)
        merged.counts = self.counts + other.counts
        return merged

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def _scored_classes(self) -> np.ndarray:
        classes = np.array([c for c in range(self.num_classes) if c != self.background])
        frequency = self.counts.sum(axis=1)[classes]
        scored = classes[frequency > 0]
        if scored.size == 0:
            raise MetricError("no non background ground truth pixels, the reward is undefined")
        return scored

    def _per_class(self):
        classes = self._scored_classes()
        tp = np.diag(self.counts)[classes].astype(float)
        fn = self.counts.sum(axis=1)[classes] - tp
        fp = self.counts.sum(axis=0)[classes] - tp
        return tp, fp, fn

    def iou(self) -> np.ndarray:
        tp, fp, fn = self._per_class()
        return tp / (tp + fp + fn)

    def miou(self) -> float:
        values = self.iou()
        return math.fsum(values) / len(values)

    def fwiou(self) -> float:
        tp, fp, fn = self._per_class()
        frequency = tp + fn
        return math.fsum(frequency * self.iou()) / math.fsum(frequency)

    def mean_pixel_accuracy(self) -> float:
        tp, _, fn = self._per_class()
        values = tp / (tp + fn)
        return math.fsum(values) / len(values)

    def metrics(self) -> MetricsModel:
        miou, fwiou, mpa = self.miou(), self.fwiou(), self.mean_pixel_accuracy()
        return MetricsModel(miou=miou, fwiou=fwiou, mpa=mpa, reward=(miou * fwiou * mpa) ** (1.0 / 3.0))


def reward(cm: ConfusionMatrix) -> float:
    """
    Geometric mean of mIoU, frequency weighted IoU and mean pixel accuracy,
    over the non background classes present in the ground truth.
    """
    return cm.metrics().reward


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Spearman rank correlation, ties get average ranks.

    Raises:
        MetricError: unequal lengths, fewer than two points, or a constant input.
    """
    xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise MetricError("spearman needs two sequences of equal length")
    if xs.size < 2:
        raise MetricError("spearman needs at least two points")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise MetricError("spearman is undefined for a constant input")
    return float(spearmanr(xs, ys)[0])
