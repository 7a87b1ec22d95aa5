# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import json
import logging
from dataclasses import dataclass
from typing import List, Literal, Tuple, Union

from auxcell.ac_types import GenomeParseError, GenomeRangeError, OpName


NUM_ENCODER_OUTPUTS = 4
NUM_PAIRS = 3
NUM_BRANCHES = 3


@dataclass(frozen=True)
class OperationSpec:
    """
    One row of the operation table: code, abbreviation and how the graph instantiates it.
    """

    code: int
    name: OpName
    kind: Literal["conv", "sep", "gap", "skip", "zero"]
    kernel: int = 1
    dilation: int = 1

    @property
    def parametric(self) -> bool:
        return self.kind not in ("skip", "zero")


OPERATIONS: Tuple[OperationSpec, ...] = (
    OperationSpec(0, "conv1x1", "conv", 1, 1),
    OperationSpec(1, "conv3x3", "conv", 3, 1),
    OperationSpec(2, "sep3x3", "sep", 3, 1),
    OperationSpec(3, "sep5x5", "sep", 5, 1),
    OperationSpec(4, "gap", "gap", 1, 1),
    OperationSpec(5, "conv3x3 rate 3", "conv", 3, 3),
    OperationSpec(6, "conv3x3 rate 12", "conv", 3, 12),
    OperationSpec(7, "sep3x3 rate 3", "sep", 3, 3),
    OperationSpec(8, "sep5x5 rate 6", "sep", 5, 6),
    OperationSpec(9, "skip", "skip"),
    OperationSpec(10, "zero", "zero"),
)

NUM_OPS = len(OPERATIONS)


def op_name(code: int) -> OpName:
    """Utility function, gets the abbreviation of an operation code."""
    return OPERATIONS[code].name


def connectivity_pool_size(pair: int) -> int:
    """Pool size seen by connectivity pair k: the 4 encoder outputs plus one output per completed block."""
    return NUM_ENCODER_OUTPUTS + pair


def cell_pool_size(branch: int) -> int:
    """Pool size seen by cell branch b: input, op0 output, then three entries per completed branch."""
    return 2 + 3 * branch


def _check_index(value: int, size: int, where: str) -> None:
    if not 0 <= value < size:
        raise GenomeRangeError(f"{where}: index {value} not in [0, {size})")


def _check_op(value: int, where: str) -> None:
    if not 0 <= value < NUM_OPS:
        raise GenomeRangeError(f"{where}: operation {value} not in [0, {NUM_OPS})")


@dataclass(frozen=True)
class ConnectivitySpec:
    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        if len(self.pairs) != NUM_PAIRS:
            raise GenomeRangeError(f"connectivity: expected {NUM_PAIRS} pairs, got {len(self.pairs)}")
        for k, pair in enumerate(self.pairs):
            if len(pair) != 2:
                raise GenomeRangeError(f"connectivity pair {k}: expected 2 indices, got {len(pair)}")
            for value in pair:
                _check_index(value, connectivity_pool_size(k), f"connectivity pair {k}")


@dataclass(frozen=True)
class Branch:
    i_a: int
    i_b: int
    op_a: int
    op_b: int


@dataclass(frozen=True)
class CellSpec:
    op0: int
    branches: Tuple[Branch, ...]

    def __post_init__(self):
        _check_op(self.op0, "cell op0")
        if len(self.branches) != NUM_BRANCHES:
            raise GenomeRangeError(f"cell: expected {NUM_BRANCHES} branches, got {len(self.branches)}")
        for b, branch in enumerate(self.branches):
            _check_index(branch.i_a, cell_pool_size(b), f"cell branch {b}")
            _check_index(branch.i_b, cell_pool_size(b), f"cell branch {b}")
            _check_op(branch.op_a, f"cell branch {b}")
            _check_op(branch.op_b, f"cell branch {b}")


@dataclass(frozen=True)
class Genome:
    """
    Decoder connectivity plus the configuration of the single searched cell.
    Instances are immutable and always valid: the range checks run on construction.
    """

    connectivity: ConnectivitySpec
    cell: CellSpec

    def to_list(self) -> List:
        return [
            [list(pair) for pair in self.connectivity.pairs],
            [self.cell.op0] + [[b.i_a, b.i_b, b.op_a, b.op_b] for b in self.cell.branches],
        ]

    @classmethod
    def from_list(cls, data: List) -> "Genome":
        if not isinstance(data, list) or len(data) != 2:
            raise GenomeParseError("genome must be a list [connectivity, cell]")

        connectivity, cell = data
        if not isinstance(connectivity, list) or not all(isinstance(p, list) for p in connectivity):
            raise GenomeParseError("connectivity must be a list of index pairs")
        if not isinstance(cell, list) or len(cell) < 1:
            raise GenomeParseError("cell must be a list [op0, branch, branch, branch]")
        if not all(isinstance(b, list) and len(b) == 4 for b in cell[1:]):
            raise GenomeParseError("each cell branch must be a list of 4 integers")

        for value in [v for p in connectivity for v in p] + [cell[0]] + [v for b in cell[1:] for v in b]:
            # bool is an int subclass, json true/false must not slip through
            if not isinstance(value, int) or isinstance(value, bool):
                raise GenomeParseError(f"genome entries must be integers, got {value!r}")

        return cls(
            ConnectivitySpec(tuple(tuple(p) for p in connectivity)),
            CellSpec(cell[0], tuple(Branch(*b) for b in cell[1:])),
        )

    def __str__(self) -> str:
        return encode(self)


def encode(genome: Genome) -> str:
    """
    Returns the canonical text of a genome: JSON nested integer arrays, no whitespace.
    """
    return json.dumps(genome.to_list(), separators=(",", ":"))


def decode(text: Union[str, bytes]) -> Genome:
    """
    Parses and validates a genome text.

    Raises:
        GenomeParseError: the text is not a nested integer list of the right shape.
        GenomeRangeError: an index or operation code is outside its valid range.
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError) as e:
        raise GenomeParseError(f"malformed genome text {text!r}: {e}") from e

    genome = Genome.from_list(data)
    logging.debug(f"Decoded genome {encode(genome)}")
    return genome


def canonicalize(genome: Genome) -> Genome:
    """
    Sorts the operands of every connectivity pair and of every cell branch,
    so that genomes equal up to operand order map to the same value.
    """
    pairs = tuple(tuple(sorted(pair)) for pair in genome.connectivity.pairs)

    branches = []
    for branch in genome.cell.branches:
        (i_a, op_a), (i_b, op_b) = sorted([(branch.i_a, branch.op_a), (branch.i_b, branch.op_b)])
        branches.append(Branch(i_a, i_b, op_a, op_b))

    return Genome(ConnectivitySpec(pairs), CellSpec(genome.cell.op0, tuple(branches)))


ARCH0 = "[[[3,3],[3,2],[3,0]],[8,[0,0,5,2],[0,2,8,8],[0,5,1,4]]]"
ARCH1 = "[[[2,3],[3,1],[4,4]],[2,[1,0,3,6],[0,1,2,8],[2,0,6,1]]]"
ARCH2 = "[[[1,3],[4,3],[2,2]],[5,[0,0,4,1],[3,2,0,1],[5,6,5,0]]]"


if __name__ == "__main__":
    from auxcell.utilities import setup_logging
    setup_logging(level="debug")

    for text in (ARCH0, ARCH1, ARCH2):
        g = decode(text)
        print(encode(g), encode(canonicalize(g)))
