# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

from auxcell.ac_types import AuxCellSettingsModel
from auxcell.graph import FeatureDesc
from auxcell.nn.checkpoint import checkpoint_exists
from auxcell.nn.trainer import FeatureSource, LogitSource
from auxcell.tasks.encoder_stub import EncoderStub
from auxcell.tasks.features import FeatureCache, LiveEncoderFeatures, precompute_encoder
from auxcell.tasks.synthetic import SyntheticDataset, TaskSplits, make_splits
from auxcell.tasks.teacher import CachedTeacherLogits, OnlineTeacherLogits, Teacher, build_teacher
from auxcell.utilities import child_rng, fingerprint, numpy_dtype


@dataclass
class TaskArtifacts:
    """
    Everything the search reads but never modifies: splits, frozen encoder, feature
    sources per split, and the distillation teacher with its meta-train logits.
    """

    splits: TaskSplits
    encoder: EncoderStub
    source_descs: List[FeatureDesc]
    train_features: FeatureSource
    val_features: FeatureSource
    holdout_features: FeatureSource
    teacher: Teacher
    teacher_logits: LogitSource


def task_key(settings: AuxCellSettingsModel) -> str:
    """Short hash of the settings that determine the task artifacts."""
    relevant = {
        "task": settings.task.model_dump(),
        "encoder": settings.encoder.model_dump(),
        "teacher": settings.teacher.model_dump(exclude={"kd_source"}),
        "dtype": settings.network.dtype,
        "batch_size": settings.network.batch_size,
    }
    return fingerprint([json.dumps(relevant, sort_keys=True)])[:12]


def _split_datasets(splits: TaskSplits):
    return {"meta_train": splits.meta_train, "meta_val": splits.meta_val, "holdout": splits.holdout}


def prepare_task(
    settings: AuxCellSettingsModel, workdir: Optional[Union[str, Path]] = None, live_features: bool = False
) -> TaskArtifacts:
    """
    Builds the task artifacts, or reuses the ones found under workdir/task-<key>/.

    Args:
        settings: the run settings.
        workdir: where artifacts are stored; None keeps everything in memory.
        live_features: recompute encoder outputs on the fly instead of caching them.
    """
    folder = Path(workdir) / f"task-{task_key(settings)}" if workdir is not None else None
    dtype = numpy_dtype(settings.network.dtype)

    def stored(name: str) -> bool:
        return folder is not None and checkpoint_exists(folder / name)

    # Datasets
    if all(stored(name) for name in ("meta_train", "meta_val", "holdout")):
        logging.info(f"Reusing datasets in {folder}")
        splits = TaskSplits(*(SyntheticDataset.load(folder / name) for name in ("meta_train", "meta_val", "holdout")))
    else:
        splits = make_splits(settings.task)
        if folder is not None:
            for name, dataset in _split_datasets(splits).items():
                dataset.save(folder / name)

    # Encoder stub
    if stored("encoder"):
        encoder = EncoderStub.load(folder / "encoder")
    else:
        encoder = EncoderStub.from_settings(settings.encoder, dtype)
        encoder.prefit(
            splits.meta_train,
            settings.task.num_classes,
            settings.encoder.prefit_epochs,
            settings.encoder.prefit_lr,
            settings.network.batch_size,
            settings.encoder.seed,
            settings.network.ignore_index,
        )
        if folder is not None:
            encoder.save(folder / "encoder")
    source_descs = encoder.feature_descs(settings.task.image_size)

    # Feature sources
    sources = {}
    for name, dataset in _split_datasets(splits).items():
        if live_features:
            sources[name] = LiveEncoderFeatures(encoder, dataset)
        elif stored(f"features_{name}"):
            sources[name] = FeatureCache.load(folder / f"features_{name}", encoder)
        else:
            sources[name] = precompute_encoder(dataset, encoder)
            if folder is not None:
                sources[name].save(folder / f"features_{name}")

    # Teacher
    if stored("teacher"):
        teacher = Teacher.load(folder / "teacher")
    else:
        teacher_rng = child_rng(settings.encoder.seed, 2)
        teacher = build_teacher(splits, sources["meta_train"], sources["holdout"], source_descs, settings, teacher_rng)
        if folder is not None:
            teacher.save(folder / "teacher")

    if settings.teacher.kd_source == "online":
        teacher_logits: LogitSource = OnlineTeacherLogits(
            teacher, sources["meta_train"], splits.meta_train.masks.shape[1:]
        )
    elif stored("teacher_logits"):
        teacher_logits = CachedTeacherLogits.load(folder / "teacher_logits")
    else:
        teacher_logits = CachedTeacherLogits.build(teacher, sources["meta_train"], splits.meta_train)
        if folder is not None:
            teacher_logits.save(folder / "teacher_logits")

    logging.info(f"Task artifacts ready, teacher holdout reward {teacher.holdout_reward:.4f}")
    return TaskArtifacts(
        splits=splits,
        encoder=encoder,
        source_descs=source_descs,
        train_features=sources["meta_train"],
        val_features=sources["meta_val"],
        holdout_features=sources["holdout"],
        teacher=teacher,
        teacher_logits=teacher_logits,
    )
