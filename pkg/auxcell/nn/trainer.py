# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Protocol, Sequence

import numpy as np

from auxcell.ac_types import LossSpec, NonFiniteError
from auxcell.metrics import ConfusionMatrix
from auxcell.nn.functional import bilinear_upsample
from auxcell.nn.losses import loss
from auxcell.nn.network import DecoderNet
from auxcell.nn.optim import step_adam, step_sgd_momentum
from auxcell.nn.params import ParamStore, polyak_reset, polyak_swap_in, polyak_swap_out, polyak_update
from auxcell.utilities import batches


class FeatureSource(Protocol):
    """Encoder features of dataset images, by position in the dataset."""

    def features(self, indices: np.ndarray) -> List[np.ndarray]: ...


class LogitSource(Protocol):
    """Distillation targets at mask resolution, by position in the dataset."""

    def logits(self, indices: np.ndarray) -> np.ndarray: ...


class TrainableEncoder(Protocol):
    store: ParamStore

    def forward(self, images: np.ndarray, mode: str = "train"): ...

    def backward(self, caches, d_features: Sequence[np.ndarray]) -> None: ...

    def features(self, images: np.ndarray) -> List[np.ndarray]: ...


class Dataset(Protocol):
    images: np.ndarray
    masks: np.ndarray

    def __len__(self) -> int: ...


@dataclass
class PhaseConfig:
    """
    One training phase. With an encoder the model trains end to end (encoder SGD with
    momentum, decoder Adam); without one the decoder trains on precomputed features.
    """

    epochs: int
    loss_spec: LossSpec = field(default_factory=LossSpec)
    batch_size: int = 16
    decoder_lr: float = 3e-3
    encoder_lr: float = 1e-3
    encoder_momentum: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    adam_eps: float = 1e-3
    polyak_decay: Optional[float] = None
    ignore_index: int = 255
    label: str = "train"


def train_phase(
    net: DecoderNet,
    dataset: Dataset,
    config: PhaseConfig,
    rng: np.random.Generator,
    features: Optional[FeatureSource] = None,
    encoder: Optional[TrainableEncoder] = None,
    teacher: Optional[LogitSource] = None,
) -> List[Dict]:
    """
    Runs config.epochs epochs of mini-batch training.

    When config.polyak_decay is set the shadows restart from the current weights and follow
    every optimizer step.

    Returns:
        List[Dict]: one entry per epoch with the mean loss terms and the learning rates.

    Raises:
        NonFiniteError: the loss or the logits stop being finite.
    """
    stores = [net.store] + ([encoder.store] if encoder is not None else [])
    if config.polyak_decay is not None:
        for store in stores:
            polyak_reset(store)

    history = []
    for epoch in range(config.epochs):
        sums: Dict[str, float] = {}
        count = 0
        for index in batches(len(dataset), config.batch_size, rng):
            for store in stores:
                store.zero_grad()
            target = dataset.masks[index].astype(np.int64)

            if encoder is not None:
                sources, encoder_caches = encoder.forward(dataset.images[index], "train")
            else:
                sources = features.features(index)

            main, aux, cache = net.forward(sources, "train")
            teacher_logits = teacher.logits(index) if teacher is not None and config.loss_spec.kd_coeff > 0 else None
            result = loss(main, aux, target, teacher_logits, config.loss_spec, config.ignore_index)
            if not math.isfinite(result.total):
                raise NonFiniteError(f"{config.label}: non finite loss at epoch {epoch + 1}")

            d_sources = net.backward(cache, result.d_main, result.d_aux)
            step_adam(net.store, config.decoder_lr, config.adam_beta1, config.adam_beta2, config.adam_eps)
            if encoder is not None:
                encoder.backward(encoder_caches, d_sources)
                step_sgd_momentum(encoder.store, config.encoder_lr, config.encoder_momentum)

            if config.polyak_decay is not None:
                for store in stores:
                    polyak_update(store, config.polyak_decay)

            for key, value in result.terms.items():
                sums[key] = sums.get(key, 0.0) + value
            count += 1

        entry = {key: value / max(count, 1) for key, value in sums.items()}
        entry.update(
            {
                "phase": config.label,
                "epoch": epoch + 1,
                "lr_decoder": config.decoder_lr,
                "lr_encoder": config.encoder_lr if encoder is not None else 0.0,
            }
        )
        history.append(entry)
        logging.info(
            f"{config.label} epoch {epoch + 1}/{config.epochs}: loss={entry.get('total', 0.0):.4f} "
            f"lr_decoder={config.decoder_lr:.2e} lr_encoder={entry['lr_encoder']:.2e}"
        )
    return history


@contextmanager
def swapped_in(stores: Sequence[ParamStore], enabled: bool = True) -> Iterator[None]:
    """Polyak shadows take the place of the live weights inside the block."""
    if not enabled:
        yield
        return
    for store in stores:
        polyak_swap_in(store)
    try:
        yield
    finally:
        for store in stores:
            polyak_swap_out(store)


def predict(net: DecoderNet, sources: Sequence[np.ndarray], height: int, width: int) -> np.ndarray:
    main, _, _ = net.forward(sources, "eval")
    return bilinear_upsample(main, height, width).argmax(axis=1)


def evaluate(
    net: DecoderNet,
    dataset: Dataset,
    num_classes: int,
    features: Optional[FeatureSource] = None,
    encoder: Optional[TrainableEncoder] = None,
    batch_size: int = 16,
    ignore_index: int = 255,
) -> ConfusionMatrix:
    """
    Eval mode confusion matrix accumulated over the whole dataset, predictions at mask resolution.
    """
    cm = ConfusionMatrix(num_classes, ignore_index=ignore_index)
    for index in batches(len(dataset), batch_size):
        sources = encoder.features(dataset.images[index]) if encoder is not None else features.features(index)
        target = dataset.masks[index]
        cm.update(predict(net, sources, *target.shape[1:]), target)
    return cm
