# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from auxcell.ac_types import CheckpointError
from auxcell.nn.checkpoint import load_arrays, save_arrays
from auxcell.tasks.encoder_stub import EncoderStub
from auxcell.tasks.synthetic import SyntheticDataset


class FeatureCache:
    """
    Precomputed encoder outputs of one dataset, versioned by the fingerprint of the encoder
    that produced them.
    """

    def __init__(self, maps: List[np.ndarray], ids: np.ndarray, stub_fingerprint: str):
        self.maps = maps
        self.ids = ids
        self.stub_fingerprint = stub_fingerprint

    @classmethod
    def build(cls, stub: EncoderStub, dataset: SyntheticDataset) -> "FeatureCache":
        logging.info(f"Precomputing encoder features of {len(dataset)} images")
        return cls(stub.features(dataset.images), dataset.ids.copy(), stub.fingerprint())

    def features(self, indices: np.ndarray) -> List[np.ndarray]:
        return [m[indices] for m in self.maps]

    def __len__(self) -> int:
        return len(self.ids)

    def save(self, path: Union[str, Path]) -> None:
        arrays = {f"stage{i}": m for i, m in enumerate(self.maps)}
        arrays["ids"] = self.ids
        save_arrays(path, arrays, {"fingerprint": self.stub_fingerprint, "stages": len(self.maps)}, kind="features")

    @classmethod
    def load(cls, path: Union[str, Path], stub: Optional[EncoderStub] = None) -> "FeatureCache":
        """
        Raises:
            CheckpointError: the cache was built by a different encoder than `stub`.
        """
        arrays, meta = load_arrays(path, kind="features")
        if stub is not None and meta.get("fingerprint") != stub.fingerprint():
            raise CheckpointError(f"{path}: feature cache was built by a different encoder")
        maps = [arrays[f"stage{i}"] for i in range(int(meta["stages"]))]
        return cls(maps, arrays["ids"], meta["fingerprint"])


class LiveEncoderFeatures:
    """
    Same interface as FeatureCache, recomputing the frozen encoder outputs on every call.
    """

    def __init__(self, stub: EncoderStub, dataset: SyntheticDataset):
        self.stub = stub
        self.dataset = dataset

    def features(self, indices: np.ndarray) -> List[np.ndarray]:
        return self.stub.features(self.dataset.images[indices])

    def __len__(self) -> int:
        return len(self.dataset)


def precompute_encoder(dataset: SyntheticDataset, stub: EncoderStub) -> FeatureCache:
    return FeatureCache.build(stub, dataset)
