# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import itertools
import logging
from typing import Dict, Iterator, Set, Union

import numpy as np
from terminaltables import AsciiTable

from auxcell.genome.genome_codec import (
    NUM_BRANCHES,
    NUM_OPS,
    NUM_PAIRS,
    Branch,
    CellSpec,
    ConnectivitySpec,
    Genome,
    canonicalize,
    cell_pool_size,
    connectivity_pool_size,
    encode,
    op_name,
)


def _ordered_connectivities() -> Iterator[ConnectivitySpec]:
    ranges = [range(connectivity_pool_size(k)) for k in range(NUM_PAIRS) for _ in range(2)]
    for flat in itertools.product(*ranges):
        yield ConnectivitySpec(tuple((flat[2 * k], flat[2 * k + 1]) for k in range(NUM_PAIRS)))


def canonicalize_connectivity(spec: ConnectivitySpec) -> ConnectivitySpec:
    return ConnectivitySpec(tuple(tuple(sorted(pair)) for pair in spec.pairs))


def enumerate_connectivities() -> Set[ConnectivitySpec]:
    """
    Brute force over every ordered connectivity structure, collapsed under operand-order symmetry.

    Returns:
        Set[ConnectivitySpec]: one canonical representative per class, pairs sorted ascending.
    """
    unique = {canonicalize_connectivity(spec) for spec in _ordered_connectivities()}
    logging.debug(f"Enumerated {len(unique)} canonical connectivity structures")
    return unique


def sorted_connectivities(specs: Set[ConnectivitySpec]):
    """Deterministic order for writing the enumeration to a file."""
    return sorted(specs, key=lambda spec: spec.pairs)


def connectivity_text(spec: ConnectivitySpec) -> str:
    return "[" + ",".join(f"[{a},{b}]" for a, b in spec.pairs) + "]"


def search_space_size() -> Dict[str, int]:
    """
    Analytic sizes of the search space.

    Returns a dict with:
        connectivity_ordered: product of the per-token choice counts of the 6 connectivity tokens.
        connectivity_canonical: count of the enumeration modulo operand-order symmetry.
        cell_upper_bound: product of the per-token choice counts of the 13 cell tokens,
            an upper bound before any symmetry reduction.
    """
    connectivity_ordered = 1
    for k in range(NUM_PAIRS):
        connectivity_ordered *= connectivity_pool_size(k) ** 2

    cell_upper_bound = NUM_OPS
    for b in range(NUM_BRANCHES):
        cell_upper_bound *= cell_pool_size(b) ** 2 * NUM_OPS**2

    return {
        "connectivity_ordered": connectivity_ordered,
        "connectivity_canonical": len(enumerate_connectivities()),
        "cell_upper_bound": cell_upper_bound,
    }


def sample_uniform(seed: Union[int, np.random.Generator]) -> Genome:
    """
    Draws every decision independently and uniformly within its pool range.
    A seed gives a reproducible draw; a Generator is advanced in place.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    pairs = []
    for k in range(NUM_PAIRS):
        size = connectivity_pool_size(k)
        pairs.append((int(rng.integers(size)), int(rng.integers(size))))

    op0 = int(rng.integers(NUM_OPS))
    branches = []
    for b in range(NUM_BRANCHES):
        size = cell_pool_size(b)
        branches.append(
            Branch(int(rng.integers(size)), int(rng.integers(size)), int(rng.integers(NUM_OPS)), int(rng.integers(NUM_OPS)))
        )

    return Genome(ConnectivitySpec(tuple(pairs)), CellSpec(op0, tuple(branches)))


def genome_to_text_table(genome: Genome) -> str:
    """
    Pretty prints a genome: connectivity pairs, then the cell with operation names
    taken from the operation table.
    """
    connectivity_data = [["Block", "Input A", "Input B", "Output index"]] + [
        [k, a, b, connectivity_pool_size(k)] for k, (a, b) in enumerate(genome.connectivity.pairs)
    ]

    cell_data = [["Step", "Input A", "Input B", "Op A", "Op B", "Sum index"]]
    cell_data.append(["op0", 0, "-", op_name(genome.cell.op0), "-", 1])
    for b, branch in enumerate(genome.cell.branches):
        cell_data.append(
            [f"branch {b}", branch.i_a, branch.i_b, op_name(branch.op_a), op_name(branch.op_b), cell_pool_size(b) + 2]
        )

    canonical = encode(canonicalize(genome))
    return "\n".join(
        [
            f"+- Genome {encode(genome)} -+",
            f"Canonical: {canonical}",
            AsciiTable(connectivity_data, "Connectivity").table,
            AsciiTable(cell_data, "Cell").table,
        ]
    )


if __name__ == "__main__":
    from auxcell.utilities import setup_logging
    setup_logging(level="debug")

    print(search_space_size())
    print(genome_to_text_table(sample_uniform(0)))
