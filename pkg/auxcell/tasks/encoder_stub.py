# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from auxcell.ac_types import CheckpointError, EncoderSettingsModel, RunMode
from auxcell.graph import FeatureDesc
from auxcell.nn import functional as F
from auxcell.nn.checkpoint import load_arrays, save_arrays
from auxcell.nn.layers import (
    LayerContext,
    add_batch_norm,
    add_conv,
    classifier_backward,
    classifier_forward,
    conv_bn_relu_backward,
    conv_bn_relu_forward,
)
from auxcell.nn.optim import step_adam
from auxcell.nn.params import ParamStore
from auxcell.tasks.synthetic import SyntheticDataset
from auxcell.utilities import batches, child_rng, fingerprint


IMAGE_CHANNELS = 3


class EncoderStub:
    """
    Four stages of conv 3x3 -> BN -> ReLU -> 2x2 average pool, emitting features at
    strides 2, 4, 8 and 16, ordered shallow to deep.
    """

    def __init__(self, channels: Sequence[int] = (8, 16, 24, 32), seed: int = 0, dtype=np.float32):
        self.channels = tuple(channels)
        self.seed = seed
        self.dtype = np.dtype(dtype)
        self.momentum = 0.1
        self.eps = 1e-5
        self.freeze_bn = False

        rng = child_rng(seed, 0)
        self.store = ParamStore()
        c_in = IMAGE_CHANNELS
        for i, c in enumerate(self.channels):
            add_conv(self.store, f"enc.s{i}.w", rng, c_in, c, 3, self.dtype, "encoder")
            add_batch_norm(self.store, f"enc.s{i}.bn", c, self.dtype, "encoder")
            c_in = c

    @classmethod
    def from_settings(cls, settings: EncoderSettingsModel, dtype=np.float32) -> "EncoderStub":
        return cls(settings.channels, settings.seed, dtype)

    def feature_descs(self, image_size: int) -> List[FeatureDesc]:
        return [
            FeatureDesc(c, image_size // 2 ** (i + 1), image_size // 2 ** (i + 1), 2 ** (i + 1))
            for i, c in enumerate(self.channels)
        ]

    def forward(self, images: np.ndarray, mode: RunMode = "train") -> Tuple[List[np.ndarray], List[Dict]]:
        ctx = LayerContext(mode, self.momentum, self.eps, self.freeze_bn)
        x = images.astype(self.dtype, copy=False)
        features, caches = [], []
        for i in range(len(self.channels)):
            y, cache = conv_bn_relu_forward(self.store, f"enc.s{i}", x, 1, ctx)
            x = F.avg_pool2(y)
            features.append(x)
            caches.append(cache)
        return features, caches

    def backward(self, caches: List[Dict], d_features: Sequence[np.ndarray]) -> None:
        """Accumulates encoder gradients from the gradients w.r.t. its four outputs."""
        carry: Optional[np.ndarray] = None
        for i in reversed(range(len(self.channels))):
            d = d_features[i] if carry is None else d_features[i] + carry
            carry = conv_bn_relu_backward(self.store, f"enc.s{i}", F.avg_pool2_backward(d), caches[i])

    def features(self, images: np.ndarray) -> List[np.ndarray]:
        """
        Eval mode features, one image at a time so the result of an image does not depend
        on the batch it comes with.
        """
        per_image = [self.forward(images[i : i + 1], "eval")[0] for i in range(len(images))]
        return [np.concatenate([f[s] for f in per_image], axis=0) for s in range(len(self.channels))]

    def fingerprint(self) -> str:
        arrays = [self.store[name] for name in sorted(self.store.slots)]
        arrays += [self.store.buffers[name] for name in sorted(self.store.buffers)]
        return fingerprint([str(self.channels)] + arrays)

    def copy(self) -> "EncoderStub":
        other = EncoderStub.__new__(EncoderStub)
        other.__dict__.update(self.__dict__)
        other.store = self.store.copy()
        return other

    def prefit(
        self,
        dataset: SyntheticDataset,
        num_classes: int,
        epochs: int = 3,
        lr: float = 3e-3,
        batch_size: int = 16,
        seed: int = 0,
        ignore_index: int = 255,
    ) -> List[float]:
        """
        Brief supervised fit through a throwaway 1x1 classifier per stage, so that the frozen
        features carry class information.

        Returns:
            List[float]: mean loss per epoch.
        """
        rng = child_rng(seed, 1)
        heads = ParamStore()
        for i, c in enumerate(self.channels):
            add_conv(heads, f"prefit.h{i}.w", rng, c, num_classes, 1, self.dtype, "prefit")
            heads.add(f"prefit.h{i}.b", np.zeros(num_classes, dtype=self.dtype), "prefit")

        history = []
        for epoch in range(epochs):
            losses = []
            for index in batches(len(dataset), batch_size, rng):
                self.store.zero_grad()
                heads.zero_grad()
                target = dataset.masks[index].astype(np.int64)
                features, caches = self.forward(dataset.images[index], "train")

                d_features, total = [], 0.0
                for i, feature in enumerate(features):
                    logits, head_cache = classifier_forward(heads, f"prefit.h{i}", feature)
                    up = F.bilinear_upsample(logits, *target.shape[1:])
                    ce, d_up = F.cross_entropy(up, target, ignore_index)
                    total += ce
                    d_logits = F.bilinear_upsample_backward(d_up, *logits.shape[2:])
                    d_features.append(classifier_backward(heads, f"prefit.h{i}", d_logits, head_cache))

                self.backward(caches, d_features)
                step_adam(self.store, lr)
                step_adam(heads, lr)
                losses.append(total)

            history.append(float(np.mean(losses)))
            logging.info(f"Encoder pre-fit epoch {epoch + 1}/{epochs}: loss={history[-1]:.4f}")
        return history

    def save(self, path: Union[str, Path]) -> None:
        meta = {"channels": list(self.channels), "seed": self.seed, "dtype": self.dtype.name}
        save_arrays(path, self.store.state_dict(), meta, kind="encoder")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "EncoderStub":
        arrays, meta = load_arrays(path, kind="encoder")
        stub = cls(meta["channels"], meta["seed"], np.dtype(meta["dtype"]))
        store = ParamStore.from_state_dict(arrays, {name: "encoder" for name in stub.store.slots})
        if set(store.slots) != set(stub.store.slots):
            raise CheckpointError(f"{path}: encoder parameters do not match its channels")
        stub.store = store
        return stub
