# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional

import numpy as np

from auxcell.ac_types import PolyakStateError, ShapeError


@dataclass
class ParamSlot:
    """
    A trainable array with its gradient, its Polyak shadow and the optimizer moments.
    """

    value: np.ndarray
    grad: np.ndarray
    shadow: np.ndarray
    group: str = "decoder"
    state: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def create(cls, value: np.ndarray, group: str = "decoder") -> "ParamSlot":
        return cls(value=value, grad=np.zeros_like(value), shadow=value.copy(), group=group)


class ParamStore:
    """
    Named parameter slots plus non trainable buffers (batch norm running statistics).
    Names look like "n12.bn.gamma" for graph nodes and "enc.s0.w" for the encoder stub.
    """

    def __init__(self):
        self.slots: Dict[str, ParamSlot] = {}
        self.buffers: Dict[str, np.ndarray] = {}
        self.swapped: bool = False

    def add(self, name: str, value: np.ndarray, group: str = "decoder") -> ParamSlot:
        self.slots[name] = ParamSlot.create(value, group)
        return self.slots[name]

    def add_buffer(self, name: str, value: np.ndarray) -> None:
        self.buffers[name] = value

    def __getitem__(self, name: str) -> np.ndarray:
        return self.slots[name].value

    def __contains__(self, name: str) -> bool:
        return name in self.slots

    def __iter__(self) -> Iterator[ParamSlot]:
        return iter(self.slots.values())

    def __len__(self) -> int:
        return len(self.slots)

    def accumulate(self, name: str, grad: np.ndarray) -> None:
        slot = self.slots[name]
        if grad.shape != slot.value.shape:
            raise ShapeError(f"gradient of {name} has shape {grad.shape}, expected {slot.value.shape}")
        slot.grad += grad

    def zero_grad(self) -> None:
        for slot in self.slots.values():
            slot.grad.fill(0)

    def group(self, group: Optional[str]) -> List[ParamSlot]:
        return [slot for slot in self.slots.values() if group is None or slot.group == group]

    def parameter_count(self, group: Optional[str] = None) -> int:
        return int(sum(slot.value.size for slot in self.group(group)))

    def copy(self) -> "ParamStore":
        other = ParamStore()
        for name, slot in self.slots.items():
            other.slots[name] = ParamSlot(
                slot.value.copy(),
                slot.grad.copy(),
                slot.shadow.copy(),
                slot.group,
                {key: array.copy() for key, array in slot.state.items()},
            )
        other.buffers = {name: array.copy() for name, array in self.buffers.items()}
        other.swapped = self.swapped
        return other

    def update(self, other: "ParamStore") -> None:
        """Adds every slot and buffer of other, sharing the arrays."""
        self.slots.update(other.slots)
        self.buffers.update(other.buffers)

    def values(self) -> Dict[str, np.ndarray]:
        return {name: slot.value for name, slot in self.slots.items()}

    def state_dict(self) -> Dict[str, np.ndarray]:
        """
        Flat dict of named arrays for the checkpoint container:
        value/<name>, shadow/<name>, state/<key>/<name>, buffer/<name>.
        """
        arrays: Dict[str, np.ndarray] = {}
        for name, slot in self.slots.items():
            arrays[f"value/{name}"] = slot.value
            arrays[f"shadow/{name}"] = slot.shadow
            for key, array in slot.state.items():
                arrays[f"state/{key}/{name}"] = array
        for name, array in self.buffers.items():
            arrays[f"buffer/{name}"] = array
        return arrays

    def groups(self) -> Dict[str, str]:
        return {name: slot.group for name, slot in self.slots.items()}

    @classmethod
    def from_state_dict(cls, arrays: Dict[str, np.ndarray], groups: Dict[str, str]) -> "ParamStore":
        store = cls()
        for key, array in arrays.items():
            if key.startswith("value/"):
                name = key[len("value/"):]
                store.add(name, array.copy(), groups.get(name, "decoder"))
        for key, array in arrays.items():
            if key.startswith("shadow/"):
                store.slots[key[len("shadow/"):]].shadow = array.copy()
            elif key.startswith("state/"):
                _, state_key, name = key.split("/", 2)
                store.slots[name].state[state_key] = array.copy()
            elif key.startswith("buffer/"):
                store.buffers[key[len("buffer/"):]] = array.copy()
        return store


def _slots(params) -> Iterable[ParamSlot]:
    return params.slots.values() if isinstance(params, ParamStore) else params


def polyak_reset(params) -> None:
    """
    Starts a new averaging window: every shadow becomes a copy of the current value.
    """
    if isinstance(params, ParamStore) and params.swapped:
        raise PolyakStateError("cannot reset Polyak shadows while they are swapped in")
    for slot in _slots(params):
        slot.shadow = slot.value.copy()


def polyak_update(params, decay: float) -> None:
    """
    shadow <- decay * shadow + (1 - decay) * value, called after every optimizer step.
    """
    for slot in _slots(params):
        slot.shadow = decay * slot.shadow + (1.0 - decay) * slot.value


def polyak_swap_in(store: ParamStore) -> None:
    """
    Exchanges live values and shadows, so the averaged parameters are used for validation.
    """
    if store.swapped:
        raise PolyakStateError("Polyak shadows are already swapped in")
    for slot in store.slots.values():
        slot.value, slot.shadow = slot.shadow, slot.value
    store.swapped = True
    logging.debug("Polyak shadows swapped in")


def polyak_swap_out(store: ParamStore) -> None:
    """
    Restores the live values after a polyak_swap_in.
    """
    if not store.swapped:
        raise PolyakStateError("Polyak shadows are not swapped in")
    for slot in store.slots.values():
        slot.value, slot.shadow = slot.shadow, slot.value
    store.swapped = False
