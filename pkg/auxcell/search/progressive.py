# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from auxcell.ac_types import (
    AblationFlagsModel,
    AuxCellException,
    AuxCellSettingsModel,
    LossSpec,
    MetricError,
    MetricsModel,
    NonFiniteError,
    SearchSettingsModel,
)
from auxcell.genome import Genome
from auxcell.graph import build
from auxcell.nn import DecoderNet, PhaseConfig, evaluate, swapped_in, train_phase
from auxcell.tasks import EncoderStub, TaskArtifacts
from auxcell.utilities import numpy_dtype


@dataclass
class StageResult:
    """
    Outcome of one progressive stage. A failed stage has reward 0 and no metrics.
    """

    reward: float
    metrics: Optional[MetricsModel]
    seconds: float
    failed: bool = False
    history: List[Dict] = field(default_factory=list)
    net: Optional[DecoderNet] = None
    encoder: Optional[EncoderStub] = None


def flags_from_settings(settings: SearchSettingsModel) -> AblationFlagsModel:
    return AblationFlagsModel(polyak=settings.polyak, kd=settings.kd, aux_mode=settings.aux_mode)


def search_loss_spec(settings: SearchSettingsModel, flags: AblationFlagsModel, distill: bool) -> LossSpec:
    """Aux coefficient shared by the three aux heads, KD only when both the stage and the flags allow it."""
    return LossSpec(
        kd_coeff=settings.kd_coeff if distill and flags.kd else 0.0,
        aux_coeffs=[settings.aux_coeff] * 3 if flags.aux_mode != "none" else [],
    )


def build_search_net(
    genome: Genome, artifacts: TaskArtifacts, settings: AuxCellSettingsModel, flags: AblationFlagsModel, rng: np.random.Generator
) -> DecoderNet:
    network = settings.network
    ir = build(
        genome,
        artifacts.source_descs,
        network.search_adapt_channels,
        settings.task.num_classes,
        with_aux=flags.aux_mode != "none",
        aux_mode=flags.aux_mode,
    )
    return DecoderNet.create(ir, rng, numpy_dtype(network.dtype), network.batch_norm_momentum, network.batch_norm_eps)


def _phase_config(settings: AuxCellSettingsModel, epochs: int, loss_spec: LossSpec, decay: Optional[float], label: str) -> PhaseConfig:
    search, network = settings.search, settings.network
    return PhaseConfig(
        epochs=epochs,
        loss_spec=loss_spec,
        batch_size=network.batch_size,
        decoder_lr=search.decoder_lr,
        encoder_lr=search.encoder_lr,
        encoder_momentum=search.encoder_momentum,
        adam_beta1=network.adam_beta1,
        adam_beta2=network.adam_beta2,
        adam_eps=network.adam_eps,
        polyak_decay=decay,
        ignore_index=network.ignore_index,
        label=label,
    )


def evaluate_stage1(
    genome: Genome,
    artifacts: TaskArtifacts,
    settings: AuxCellSettingsModel,
    rng: np.random.Generator,
    flags: Optional[AblationFlagsModel] = None,
) -> StageResult:
    """
    Trains the decoder alone on the cached encoder features, with the distillation term
    when enabled, then scores it on meta-val with the Polyak weights swapped in.

    A non finite loss, or a meta-val split without foreground pixels, scores the architecture 0
    and flags it as failed.
    """
    flags = flags if flags is not None else flags_from_settings(settings.search)
    search = settings.search
    start = time.perf_counter()

    net = build_search_net(genome, artifacts, settings, flags, rng)
    config = _phase_config(
        settings,
        search.stage1_epochs,
        search_loss_spec(search, flags, distill=True),
        search.polyak_decays[0] if flags.polyak else None,
        "stage1",
    )
    teacher = artifacts.teacher_logits if config.loss_spec.kd_coeff > 0 else None

    try:
        history = train_phase(net, artifacts.splits.meta_train, config, rng, features=artifacts.train_features, teacher=teacher)
        with swapped_in([net.store], flags.polyak):
            metrics = evaluate(
                net,
                artifacts.splits.meta_val,
                settings.task.num_classes,
                features=artifacts.val_features,
                batch_size=settings.network.batch_size,
                ignore_index=settings.network.ignore_index,
            ).metrics()
    except (NonFiniteError, MetricError) as e:
        logging.warning(f"Stage 1 of {genome} failed: {e}")
        return StageResult(0.0, None, time.perf_counter() - start, failed=True)

    return StageResult(metrics.reward, metrics, time.perf_counter() - start, history=history, net=net)


def evaluate_stage2(
    genome: Genome,
    stage1: StageResult,
    artifacts: TaskArtifacts,
    settings: AuxCellSettingsModel,
    rng: np.random.Generator,
    flags: Optional[AblationFlagsModel] = None,
) -> StageResult:
    """
    Continues from the stage-1 live weights and trains encoder and decoder end to end, without
    distillation. The encoder is a private copy of the frozen stub, so the shared caches stay valid.
    """
    if stage1.failed or stage1.net is None:
        raise AuxCellException("stage 2 needs a completed stage 1")
    flags = flags if flags is not None else flags_from_settings(settings.search)
    search = settings.search
    start = time.perf_counter()

    net = stage1.net
    encoder = artifacts.encoder.copy()
    config = _phase_config(
        settings,
        search.stage2_epochs,
        search_loss_spec(search, flags, distill=False),
        search.polyak_decays[1] if flags.polyak else None,
        "stage2",
    )

    try:
        history = train_phase(net, artifacts.splits.meta_train, config, rng, encoder=encoder)
        with swapped_in([net.store, encoder.store], flags.polyak):
            metrics = evaluate(
                net,
                artifacts.splits.meta_val,
                settings.task.num_classes,
                encoder=encoder,
                batch_size=settings.network.batch_size,
                ignore_index=settings.network.ignore_index,
            ).metrics()
    except (NonFiniteError, MetricError) as e:
        logging.warning(f"Stage 2 of {genome} failed: {e}")
        return StageResult(0.0, None, time.perf_counter() - start, failed=True)

    return StageResult(metrics.reward, metrics, time.perf_counter() - start, history=history, net=net, encoder=encoder)
