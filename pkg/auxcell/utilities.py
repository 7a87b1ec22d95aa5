# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

from typing import Iterable, Sequence, Union
import hashlib
import logging

import numpy as np

from auxcell.ac_types import DType


def setup_logging(level: str) -> None:
    """Setup logging for testing.

    Args:
        level: Log level as a string, options: debug, info, warning, error"""
    logopt: dict[str, int] = {"debug": logging.DEBUG,
                              "info": logging.INFO,
                              "warning": logging.WARNING,
                              "error": logging.ERROR}
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    loglevel: int = logopt.get(level, logging.INFO)
    logging.basicConfig(format=format, level=loglevel)


def numpy_dtype(name: DType) -> np.dtype:
    """Utility function, maps the configured precision name to a numpy dtype."""
    return np.dtype(np.float64 if name == "float64" else np.float32)


def child_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Utility function, derives an independent generator from a root seed and a stream key,
    e.g. child_rng(seed, architecture_index). Same key, same stream, regardless of thread order.
    """
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])


def fingerprint(arrays: Iterable[Union[np.ndarray, bytes, str]]) -> str:
    """Utility function, sha256 of a sequence of arrays or strings, used to version caches."""
    digest = hashlib.sha256()
    for item in arrays:
        if isinstance(item, np.ndarray):
            digest.update(str(item.dtype).encode())
            digest.update(str(item.shape).encode())
            digest.update(np.ascontiguousarray(item).tobytes())
        elif isinstance(item, str):
            digest.update(item.encode("utf8"))
        else:
            digest.update(item)
    return digest.hexdigest()


def batches(count: int, batch_size: int, rng: Union[np.random.Generator, None] = None) -> Sequence[np.ndarray]:
    """Utility function, splits range(count) into mini-batches of indices, shuffled when a generator is given."""
    order = rng.permutation(count) if rng is not None else np.arange(count)
    return [order[start:start + batch_size] for start in range(0, count, batch_size)]
