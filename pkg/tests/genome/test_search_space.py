import numpy as np

from auxcell.genome import (
    ARCH0,
    ConnectivitySpec,
    decode,
    encode,
    enumerate_connectivities,
    genome_to_text_table,
    sample_uniform,
    search_space_size,
    sorted_connectivities,
)
from auxcell.genome.search_space import canonicalize_connectivity

from .expected_genomes import CANONICAL_CONNECTIVITY_COUNT, CELL_UPPER_BOUND, ORDERED_CONNECTIVITY_COUNT


class TestEnumeration:
    def setup_class(self):
        self.specs = enumerate_connectivities()

    def test_count(self):
        assert len(self.specs) == CANONICAL_CONNECTIVITY_COUNT

    def test_stable_across_runs(self):
        for _ in range(4):
            assert enumerate_connectivities() == self.specs

    def test_first_pair_alone(self):
        assert len({spec.pairs[0] for spec in self.specs}) == 10

    def test_representatives_are_sorted(self):
        for spec in self.specs:
            assert all(a <= b for a, b in spec.pairs)

    def test_pair_order_counted_once(self):
        a = ConnectivitySpec(((3, 2), (0, 1), (5, 4)))
        b = ConnectivitySpec(((2, 3), (1, 0), (4, 5)))
        assert canonicalize_connectivity(a) == canonicalize_connectivity(b)
        assert canonicalize_connectivity(a) in self.specs

    def test_sorted_order_is_deterministic(self):
        assert sorted_connectivities(self.specs) == sorted_connectivities(set(self.specs))
        assert sorted_connectivities(self.specs)[0].pairs == ((0, 0), (0, 0), (0, 0))

    def test_search_space_size(self):
        sizes = search_space_size()
        assert sizes["connectivity_ordered"] == ORDERED_CONNECTIVITY_COUNT
        assert sizes["connectivity_canonical"] == CANONICAL_CONNECTIVITY_COUNT
        assert sizes["cell_upper_bound"] == CELL_UPPER_BOUND


class TestSampleUniform:
    def test_deterministic(self):
        assert sample_uniform(7) == sample_uniform(7)
        assert encode(sample_uniform(np.random.default_rng(3))) == encode(sample_uniform(np.random.default_rng(3)))

    def test_draws_are_valid(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            genome = sample_uniform(rng)
            assert decode(encode(genome)) == genome

    def test_pair0_frequencies(self):
        rng = np.random.default_rng(0)
        counts = np.zeros(4)
        for _ in range(10_000):
            a, b = sample_uniform(rng).connectivity.pairs[0]
            counts[a] += 1
            counts[b] += 1
        frequencies = counts / counts.sum()
        assert np.all(np.abs(frequencies - 0.25) < 0.02)


def test_text_table_names_operations():
    text = genome_to_text_table(decode(ARCH0))
    assert "sep5x5 rate 6" in text
    assert "Canonical:" in text
    assert ARCH0 in text
