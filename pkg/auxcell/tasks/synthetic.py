# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from skimage.draw import disk, polygon, rectangle

from auxcell.ac_types import SyntheticTaskSettingsModel
from auxcell.nn.checkpoint import load_arrays, save_arrays
from auxcell.utilities import child_rng


BACKGROUND = 0

# Shape drawn for each foreground class
CLASS_SHAPES = {1: "disk", 2: "rectangle", 3: "triangle", 4: "ring"}

# Base RGB color per class, background first
PALETTE = np.array(
    [
        [0.15, 0.15, 0.15],
        [0.90, 0.25, 0.20],
        [0.20, 0.80, 0.25],
        [0.20, 0.35, 0.90],
        [0.90, 0.80, 0.20],
    ]
)


@dataclass
class SyntheticDataset:
    """
    Images (N, 3, H, W) float32 and masks (N, H, W) uint8, ids unique within a task.
    """

    images: np.ndarray
    masks: np.ndarray
    ids: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)

    def subset(self, indices) -> "SyntheticDataset":
        indices = np.asarray(indices)
        return SyntheticDataset(self.images[indices], self.masks[indices], self.ids[indices])

    def save(self, path: Union[str, Path]) -> None:
        save_arrays(path, {"images": self.images, "masks": self.masks, "ids": self.ids}, kind="dataset")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SyntheticDataset":
        arrays, _ = load_arrays(path, kind="dataset")
        return cls(arrays["images"], arrays["masks"], arrays["ids"])


def _shape_pixels(shape: str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Boolean canvas of one randomly placed shape."""
    canvas = np.zeros((size, size), dtype=bool)
    radius = rng.uniform(size / 10, size / 5)
    center = rng.uniform(radius, size - radius, size=2)

    if shape == "disk":
        canvas[disk(tuple(center), radius, shape=canvas.shape)] = True
    elif shape == "rectangle":
        extent = rng.uniform(size / 6, size / 2.5, size=2)
        start = np.clip(center - extent / 2, 0, size - 1)
        rr, cc = rectangle(tuple(start.astype(int)), extent=tuple(np.maximum(extent.astype(int), 2)), shape=canvas.shape)
        canvas[rr, cc] = True
    elif shape == "triangle":
        angles = rng.uniform(0, 2 * np.pi) + np.array([0.0, 2 * np.pi / 3, 4 * np.pi / 3])
        rows = center[0] + radius * 1.3 * np.sin(angles)
        cols = center[1] + radius * 1.3 * np.cos(angles)
        canvas[polygon(rows, cols, shape=canvas.shape)] = True
    elif shape == "ring":
        canvas[disk(tuple(center), radius, shape=canvas.shape)] = True
        canvas[disk(tuple(center), radius * 0.55, shape=canvas.shape)] = False
    return canvas


def draw_sample(
    rng: np.random.Generator, size: int, num_classes: int, min_shapes: int, max_shapes: int, noise: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One image with its mask. Later shapes occlude earlier ones in both.
    """
    mask = np.full((size, size), BACKGROUND, dtype=np.uint8)
    image = np.empty((3, size, size))
    image[:] = (PALETTE[BACKGROUND] + rng.uniform(-0.05, 0.05, size=3))[:, None, None]

    for _ in range(int(rng.integers(min_shapes, max_shapes + 1))):
        cls = int(rng.integers(1, num_classes))
        pixels = _shape_pixels(CLASS_SHAPES[cls], rng, size)
        color = np.clip(PALETTE[cls] + rng.uniform(-0.1, 0.1, size=3), 0.0, 1.0)
        image[:, pixels] = color[:, None]
        mask[pixels] = cls

    image += rng.normal(0.0, noise, size=image.shape)
    return image.astype(np.float32), mask


def generate(settings: SyntheticTaskSettingsModel, count: int, rng: np.random.Generator, first_id: int = 0) -> SyntheticDataset:
    """
    Draws `count` images of randomly placed colored shapes, each shape class with a fixed geometry.
    """
    size = settings.image_size
    images = np.empty((count, 3, size, size), dtype=np.float32)
    masks = np.empty((count, size, size), dtype=np.uint8)
    for i in range(count):
        images[i], masks[i] = draw_sample(rng, size, settings.num_classes, settings.min_shapes, settings.max_shapes, settings.noise)
    return SyntheticDataset(images, masks, np.arange(first_id, first_id + count, dtype=np.int64))


@dataclass
class TaskSplits:
    meta_train: SyntheticDataset
    meta_val: SyntheticDataset
    holdout: SyntheticDataset


def make_splits(settings: SyntheticTaskSettingsModel) -> TaskSplits:
    """
    Generates the training pool and divides it at random into disjoint meta-train and meta-val
    sets, plus a holdout set drawn separately and never seen by the search.
    """
    pool = generate(settings, settings.train_pool_size, child_rng(settings.seed, 0))
    holdout = generate(settings, settings.holdout_size, child_rng(settings.seed, 1), first_id=settings.train_pool_size)

    order = child_rng(settings.seed, 2).permutation(len(pool))
    n_val = min(max(1, int(round(settings.val_fraction * len(pool)))), len(pool) - 1)
    splits = TaskSplits(meta_train=pool.subset(order[n_val:]), meta_val=pool.subset(order[:n_val]), holdout=holdout)

    logging.info(
        f"Synthetic task: {len(splits.meta_train)} meta-train, {len(splits.meta_val)} meta-val, "
        f"{len(splits.holdout)} holdout images of {settings.image_size}x{settings.image_size}"
    )
    return splits


def class_frequencies(dataset: SyntheticDataset, num_classes: int) -> np.ndarray:
    return np.bincount(dataset.masks.ravel(), minlength=num_classes)[:num_classes]
