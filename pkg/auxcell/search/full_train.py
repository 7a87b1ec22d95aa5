# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from auxcell.ac_types import AuxCellSettingsModel, AuxMode, CheckpointError, LossSpec, MetricsModel
from auxcell.genome import Genome, decode, encode
from auxcell.graph import FeatureDesc, build, estimate
from auxcell.nn import DecoderNet, ParamStore, PhaseConfig, evaluate, load_arrays, save_arrays, train_phase
from auxcell.tasks import EncoderStub, TaskArtifacts
from auxcell.utilities import child_rng, numpy_dtype


AUX_ARMS: Tuple[AuxMode, ...] = ("none", "classifier", "cell")


@dataclass
class FullTrainResult:
    """
    A fully trained genome. `metrics` is measured on the holdout set with the auxiliary nodes in
    place, `stripped_metrics` after deleting them.
    """

    genome: Genome
    aux_mode: AuxMode
    net: DecoderNet
    encoder: EncoderStub
    metrics: MetricsModel
    stripped_metrics: MetricsModel
    params: int
    madds: int
    history: List[Dict] = field(default_factory=list)


def stage_schedule(settings: AuxCellSettingsModel) -> List[Dict]:
    """
    Training segments of a full run. The learning rates halve after each stage; halfway through
    the last stage batch norm statistics freeze and the rates halve once more.
    """
    ft = settings.full_train
    segments = []
    scale = 1.0
    for stage, (epochs, aux_coeff) in enumerate(zip(ft.stage_epochs, ft.aux_coeffs)):
        last = stage == len(ft.stage_epochs) - 1
        if last and ft.freeze_bn_halfway and epochs >= 2:
            first = epochs - epochs // 2
            segments.append({"stage": stage, "epochs": first, "aux_coeff": aux_coeff, "scale": scale, "freeze_bn": False})
            segments.append({"stage": stage, "epochs": epochs - first, "aux_coeff": aux_coeff, "scale": scale / 2, "freeze_bn": True})
        elif epochs > 0:
            segments.append({"stage": stage, "epochs": epochs, "aux_coeff": aux_coeff, "scale": scale, "freeze_bn": False})
        scale /= 2
    return segments


def full_train(
    genome: Genome,
    artifacts: TaskArtifacts,
    settings: AuxCellSettingsModel,
    aux_mode: Optional[AuxMode] = None,
) -> FullTrainResult:
    """
    Longer end to end training of one genome on meta-train, scored on the holdout set.
    No Polyak averaging and no distillation.

    Args:
        genome: the architecture to train.
        artifacts: task artifacts; the encoder stub is copied, never modified.
        settings: settings.full_train holds the schedule.
        aux_mode: "none", "classifier" or "cell"; settings.full_train.aux_mode when None.
    """
    ft, network = settings.full_train, settings.network
    aux_mode = aux_mode if aux_mode is not None else ft.aux_mode
    dtype = numpy_dtype(network.dtype)

    ir = build(
        genome, artifacts.source_descs, network.train_adapt_channels, settings.task.num_classes, aux_mode != "none", aux_mode
    )
    net = DecoderNet.create(ir, child_rng(ft.seed, 0), dtype, network.batch_norm_momentum, network.batch_norm_eps)
    encoder = artifacts.encoder.copy()
    rng = child_rng(ft.seed, 1)

    history: List[Dict] = []
    for segment in stage_schedule(settings):
        if segment["freeze_bn"]:
            net.freeze_bn = encoder.freeze_bn = True
            logging.info(f"Stage {segment['stage'] + 1}: batch norm statistics frozen, learning rates halved")
        config = PhaseConfig(
            epochs=segment["epochs"],
            loss_spec=LossSpec(kd_coeff=0.0, aux_coeffs=[segment["aux_coeff"]] * 3 if aux_mode != "none" else []),
            batch_size=network.batch_size,
            decoder_lr=ft.decoder_lr * segment["scale"],
            encoder_lr=ft.encoder_lr * segment["scale"],
            encoder_momentum=settings.search.encoder_momentum,
            adam_beta1=network.adam_beta1,
            adam_beta2=network.adam_beta2,
            adam_eps=network.adam_eps,
            ignore_index=network.ignore_index,
            label=f"full stage {segment['stage'] + 1}",
        )
        logging.info(
            f"Stage {segment['stage'] + 1}: lr_decoder={config.decoder_lr:.2e} lr_encoder={config.encoder_lr:.2e} "
            f"aux_coeff={segment['aux_coeff']}"
        )
        for entry in train_phase(net, artifacts.splits.meta_train, config, rng, encoder=encoder):
            entry["stage"] = segment["stage"] + 1
            history.append(entry)

    def holdout(model: DecoderNet) -> MetricsModel:
        return evaluate(
            model,
            artifacts.splits.holdout,
            settings.task.num_classes,
            encoder=encoder,
            batch_size=network.batch_size,
            ignore_index=network.ignore_index,
        ).metrics()

    metrics = holdout(net)
    stripped = holdout(net.strip_aux())
    params, madds = estimate(ir)
    logging.info(f"Full training of {genome} ({aux_mode}): holdout reward={metrics.reward:.4f} params={params} madds={madds}")
    return FullTrainResult(genome, aux_mode, net, encoder, metrics, stripped, params, madds, history)


def save_trained(path: Union[str, Path], result: FullTrainResult) -> None:
    """Decoder and encoder weights of a full run, enough for `load_trained` to rebuild the model."""
    arrays = {f"decoder/{k}": v for k, v in result.net.store.state_dict().items()}
    arrays.update({f"encoder/{k}": v for k, v in result.encoder.store.state_dict().items()})
    ir = result.net.ir
    meta = {
        "genome": encode(result.genome),
        "aux_mode": result.aux_mode,
        "adapt_channels": ir.adapt_channels,
        "num_classes": ir.num_classes,
        "sources": [[d.channels, d.height, d.width, d.stride] for d in ir.source_descs],
        "encoder_channels": list(result.encoder.channels),
        "encoder_seed": result.encoder.seed,
        "dtype": result.encoder.dtype.name,
        "metrics": result.metrics.model_dump(),
    }
    save_arrays(path, arrays, meta, kind="trained-model")


def load_trained(path: Union[str, Path]) -> Tuple[Genome, DecoderNet, EncoderStub]:
    """
    Raises:
        CheckpointError: the checkpoint does not hold a complete model.
    """
    arrays, meta = load_arrays(path, kind="trained-model")
    genome = decode(meta["genome"])
    sources = [FeatureDesc(*d) for d in meta["sources"]]
    aux_mode = meta["aux_mode"]
    ir = build(genome, sources, meta["adapt_channels"], meta["num_classes"], aux_mode != "none", aux_mode)

    def part(prefix: str) -> Dict[str, np.ndarray]:
        return {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)}

    encoder = EncoderStub(meta["encoder_channels"], meta["encoder_seed"], np.dtype(meta["dtype"]))
    encoder_store = ParamStore.from_state_dict(part("encoder/"), {name: "encoder" for name in encoder.store.slots})
    if set(encoder_store.slots) != set(encoder.store.slots):
        raise CheckpointError(f"{path}: encoder parameters do not match")
    encoder.store = encoder_store

    net = DecoderNet(ir, ParamStore.from_state_dict(part("decoder/"), {}))
    if not net.store.slots:
        raise CheckpointError(f"{path}: checkpoint holds no decoder parameters")
    return genome, net, encoder


def train_arms(
    genomes: Sequence[str],
    artifacts: TaskArtifacts,
    settings: AuxCellSettingsModel,
    arms: Sequence[AuxMode] = AUX_ARMS,
) -> List[Dict]:
    """
    Full trains every genome under every aux arm.

    Returns:
        List[Dict]: one row per genome and arm with the holdout metrics.
    """
    rows = []
    for rank, text in enumerate(genomes, start=1):
        genome = decode(text)
        for arm in arms:
            result = full_train(genome, artifacts, settings, arm)
            rows.append(
                {
                    "rank": rank,
                    "genome": encode(genome),
                    "aux_mode": arm,
                    "reward": result.metrics.reward,
                    "miou": result.metrics.miou,
                    "fwiou": result.metrics.fwiou,
                    "mpa": result.metrics.mpa,
                    "stripped_reward": result.stripped_metrics.reward,
                    "params": result.params,
                    "madds": result.madds,
                }
            )
    return rows


def write_rows_csv(path: Union[str, Path], rows: List[Dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0]) if rows else [])
        writer.writeheader()
        writer.writerows(rows)
    logging.info(f"Wrote {len(rows)} rows to {path}")
