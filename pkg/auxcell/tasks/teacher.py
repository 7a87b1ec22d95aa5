# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from auxcell.ac_types import AuxCellSettingsModel, CheckpointError, LossSpec, TeacherTrainingError
from auxcell.genome import Genome, decode, encode
from auxcell.graph import FeatureDesc, build
from auxcell.nn import DecoderNet, ParamStore, PhaseConfig, bilinear_upsample, evaluate, load_arrays, save_arrays, train_phase
from auxcell.nn.trainer import FeatureSource
from auxcell.tasks.synthetic import SyntheticDataset, TaskSplits
from auxcell.utilities import numpy_dtype


@dataclass
class Teacher:
    """
    A fixed hand written decoder trained once on meta-train, then frozen.
    """

    genome: Genome
    net: DecoderNet
    holdout_reward: float
    epochs: int

    def logits(self, features: FeatureSource, indices: np.ndarray, height: int, width: int) -> np.ndarray:
        """
        Eval mode logits at mask resolution, one image at a time so that results do not
        depend on the batch composition.
        """
        out = [bilinear_upsample(self.net.predict(features.features(indices[i : i + 1])), height, width) for i in range(len(indices))]
        return np.concatenate(out, axis=0)

    def save(self, path: Union[str, Path]) -> None:
        meta = {
            "genome": encode(self.genome),
            "holdout_reward": self.holdout_reward,
            "epochs": self.epochs,
            "adapt_channels": self.net.ir.adapt_channels,
            "num_classes": self.net.ir.num_classes,
            "sources": [[d.channels, d.height, d.width, d.stride] for d in self.net.ir.source_descs],
        }
        save_arrays(path, self.net.store.state_dict(), meta, kind="teacher")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Teacher":
        arrays, meta = load_arrays(path, kind="teacher")
        genome = decode(meta["genome"])
        sources = [FeatureDesc(*d) for d in meta["sources"]]
        ir = build(genome, sources, meta["adapt_channels"], meta["num_classes"], with_aux=False)
        store = ParamStore.from_state_dict(arrays, {})
        if not store.slots:
            raise CheckpointError(f"{path}: teacher checkpoint holds no parameters")
        return cls(genome, DecoderNet(ir, store), meta["holdout_reward"], meta["epochs"])


class CachedTeacherLogits:
    """
    Teacher logits of one dataset computed once, looked up by dataset position.
    """

    def __init__(self, maps: np.ndarray):
        self.maps = maps

    @classmethod
    def build(cls, teacher: Teacher, features: FeatureSource, dataset: SyntheticDataset) -> "CachedTeacherLogits":
        logging.info(f"Caching teacher logits of {len(dataset)} images")
        return cls(teacher.logits(features, np.arange(len(dataset)), *dataset.masks.shape[1:]))

    def logits(self, indices: np.ndarray) -> np.ndarray:
        return self.maps[indices]

    def save(self, path: Union[str, Path]) -> None:
        save_arrays(path, {"logits": self.maps}, kind="teacher-logits")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CachedTeacherLogits":
        arrays, _ = load_arrays(path, kind="teacher-logits")
        return cls(arrays["logits"])


class OnlineTeacherLogits:
    """
    Same interface as CachedTeacherLogits, recomputing a teacher forward pass for every batch.
    """

    def __init__(self, teacher: Teacher, features: FeatureSource, mask_size: Tuple[int, int]):
        self.teacher = teacher
        self.features = features
        self.mask_size = mask_size

    def logits(self, indices: np.ndarray) -> np.ndarray:
        return self.teacher.logits(self.features, indices, *self.mask_size)


def build_teacher(
    splits: TaskSplits,
    train_features: FeatureSource,
    holdout_features: FeatureSource,
    source_descs: List[FeatureDesc],
    settings: AuxCellSettingsModel,
    rng: np.random.Generator,
) -> Teacher:
    """
    Trains the teacher decoder on meta-train until its holdout reward reaches
    settings.teacher.min_reward.

    Raises:
        TeacherTrainingError: the threshold is not reached within settings.teacher.max_epochs.
    """
    ts, net_settings = settings.teacher, settings.network
    genome = decode(ts.genome)
    ir = build(genome, source_descs, ts.adapt_channels, settings.task.num_classes, with_aux=False)
    net = DecoderNet.create(ir, rng, numpy_dtype(net_settings.dtype), net_settings.batch_norm_momentum, net_settings.batch_norm_eps)

    config = PhaseConfig(
        epochs=1,
        loss_spec=LossSpec(kd_coeff=0.0, aux_coeffs=[]),
        batch_size=net_settings.batch_size,
        decoder_lr=ts.lr,
        adam_beta1=net_settings.adam_beta1,
        adam_beta2=net_settings.adam_beta2,
        adam_eps=net_settings.adam_eps,
        ignore_index=net_settings.ignore_index,
        label="teacher",
    )

    best: Optional[float] = None
    for epoch in range(1, ts.max_epochs + 1):
        train_phase(net, splits.meta_train, config, rng, features=train_features)
        reward = evaluate(
            net, splits.holdout, settings.task.num_classes, features=holdout_features,
            batch_size=net_settings.batch_size, ignore_index=net_settings.ignore_index,
        ).metrics().reward
        best = reward if best is None else max(best, reward)
        logging.info(f"Teacher epoch {epoch}/{ts.max_epochs}: holdout reward={reward:.4f}")
        if reward >= ts.min_reward:
            return Teacher(genome, net, reward, epoch)

    raise TeacherTrainingError(
        f"teacher {ts.genome} reached a best holdout reward of {best:.4f} in {ts.max_epochs} epochs, "
        f"below the required {ts.min_reward}"
    )
