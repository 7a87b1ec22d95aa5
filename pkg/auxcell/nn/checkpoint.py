# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024

    Checkpoint container shared by parameters, the controller, datasets and caches:
    <path>.bin holds the raw arrays back to back, <path>.manifest describes them.

        auxcell-checkpoint v1
        kind <kind>
        meta <json object>
        array <name> <dtype> <shape, e.g. 2x3x4 or "scalar"> <offset> <nbytes>
        ...
        end <total bytes>
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from auxcell.ac_types import CheckpointError


CHECKPOINT_VERSION = "auxcell-checkpoint v1"


def _paths(path: Union[str, Path]) -> Tuple[Path, Path]:
    path = Path(path)
    return path.with_name(path.name + ".bin"), path.with_name(path.name + ".manifest")


def checkpoint_exists(path: Union[str, Path]) -> bool:
    return all(p.exists() for p in _paths(path))


def save_arrays(path: Union[str, Path], arrays: Dict[str, np.ndarray], meta: Optional[Dict] = None, kind: str = "params") -> None:
    """
    Writes named arrays to <path>.bin and <path>.manifest. Names must not contain whitespace.
    """
    bin_path, manifest_path = _paths(path)
    bin_path.parent.mkdir(parents=True, exist_ok=True)

    lines = [CHECKPOINT_VERSION, f"kind {kind}", f"meta {json.dumps(meta or {}, sort_keys=True)}"]
    offset = 0
    with open(bin_path, "wb") as f:
        for name in sorted(arrays):
            if any(ch.isspace() for ch in name):
                raise CheckpointError(f"array name {name!r} contains whitespace")
            array = np.ascontiguousarray(arrays[name])
            shape = "x".join(str(s) for s in array.shape) if array.ndim else "scalar"
            data = array.tobytes()
            f.write(data)
            lines.append(f"array {name} {array.dtype.str} {shape} {offset} {len(data)}")
            offset += len(data)
    lines.append(f"end {offset}")

    manifest_path.write_text("\n".join(lines) + "\n", encoding="utf8")
    logging.debug(f"Saved {len(arrays)} arrays ({offset} bytes) to {bin_path}")


def load_arrays(path: Union[str, Path], kind: Optional[str] = None) -> Tuple[Dict[str, np.ndarray], Dict]:
    """
    Reads a container written by save_arrays.

    Returns:
        (arrays by name, meta dict)

    Raises:
        CheckpointError: missing files, wrong version or kind, or a manifest that does not match the data.
    """
    bin_path, manifest_path = _paths(path)
    if not checkpoint_exists(path):
        raise CheckpointError(f"no checkpoint at {path}")

    lines = manifest_path.read_text(encoding="utf8").splitlines()
    if not lines or lines[0] != CHECKPOINT_VERSION:
        raise CheckpointError(f"{manifest_path}: unsupported version line {lines[0] if lines else ''!r}")

    try:
        stored_kind = lines[1].split(" ", 1)[1] if lines[1].startswith("kind ") else None
        meta = json.loads(lines[2].split(" ", 1)[1]) if lines[2].startswith("meta ") else None
    except (IndexError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{manifest_path}: corrupted header: {e}") from e
    if stored_kind is None or meta is None:
        raise CheckpointError(f"{manifest_path}: corrupted header")
    if kind is not None and stored_kind != kind:
        raise CheckpointError(f"{manifest_path}: expected a {kind} checkpoint, found {stored_kind}")

    data = bin_path.read_bytes()
    if not lines[-1].startswith("end ") or lines[-1] != f"end {len(data)}":
        raise CheckpointError(f"{manifest_path}: truncated manifest or data file")

    arrays: Dict[str, np.ndarray] = {}
    for line in lines[3:-1]:
        parts = line.split(" ")
        if len(parts) != 6 or parts[0] != "array":
            raise CheckpointError(f"{manifest_path}: corrupted line {line!r}")
        _, name, dtype, shape_text, offset_text, nbytes_text = parts
        try:
            shape = () if shape_text == "scalar" else tuple(int(s) for s in shape_text.split("x"))
            offset, nbytes = int(offset_text), int(nbytes_text)
            array = np.frombuffer(data, dtype=np.dtype(dtype), count=int(np.prod(shape)) if shape else 1, offset=offset)
        except (ValueError, TypeError) as e:
            raise CheckpointError(f"{manifest_path}: corrupted line {line!r}: {e}") from e
        if array.nbytes != nbytes:
            raise CheckpointError(f"{manifest_path}: size mismatch for {name}")
        arrays[name] = array.reshape(shape).copy()

    logging.debug(f"Loaded {len(arrays)} arrays from {bin_path}")
    return arrays, meta
