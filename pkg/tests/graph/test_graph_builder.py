import pytest

from auxcell import ShapeError
from auxcell.genome import ARCH0, ARCH1, ARCH2, decode, sample_uniform
from auxcell.graph import (
    FeatureDesc,
    build,
    check_acyclic,
    estimate,
    output_resolution,
    strip_aux,
    unconsumed_blocks,
    unconsumed_branch_sums,
)


SOURCES = [FeatureDesc(c, 48 // s, 48 // s, s) for c, s in zip((8, 16, 24, 32), (2, 4, 8, 16))]
INPUT = FeatureDesc(3, 48, 48, 1)


def head_inputs(ir):
    """Ids feeding the head concat, looking through the alignment upsamples."""
    fuse = next(n for n in ir.nodes if n.kind == "fuse-1x1")
    concat = ir.node(fuse.inputs[0])
    inputs = concat.inputs if concat.kind == "concat" else (concat.id,)
    return [ir.node(i).inputs[0] if ir.node(i).kind == "upsample" else i for i in inputs]


class TestBuild:
    def setup_class(self):
        self.arch0 = build(decode(ARCH0), SOURCES, 16, 5)
        self.arch1 = build(decode(ARCH1), SOURCES, 16, 5)
        self.arch2 = build(decode(ARCH2), SOURCES, 16, 5)

    def test_arch0_concatenates_every_block(self):
        assert unconsumed_blocks(decode(ARCH0)) == [4, 5, 6]
        assert head_inputs(self.arch0) == list(self.arch0.block_outputs)

    def test_arch1_concatenates_last_two_blocks(self):
        assert unconsumed_blocks(decode(ARCH1)) == [5, 6]
        assert head_inputs(self.arch1) == list(self.arch1.block_outputs[1:])

    def test_unconsumed_branch_sums(self):
        assert unconsumed_branch_sums(decode(ARCH0)) == [4, 7, 10]
        assert unconsumed_branch_sums(decode("[[[0,0],[0,0],[0,0]],[0,[0,1,0,0],[4,0,0,0],[7,0,0,0]]]")) == [10]

    def test_block_shapes(self):
        # arch0 block 2 sums a stride 16 cell with a stride 2 cell
        sizes = [self.arch0.node(i).out_desc.size for i in self.arch0.block_outputs]
        assert sizes == [(3, 3), (6, 6), (24, 24)]
        assert all(self.arch0.node(i).out_desc.channels == 16 for i in self.arch0.block_outputs)

    def test_main_output(self):
        out = self.arch0.node(self.arch0.main_output)
        assert out.kind == "classifier"
        assert out.out_desc.channels == 5
        assert output_resolution(self.arch0, INPUT) == (24, 24, 2)

    def test_aux_outputs(self):
        for ir in (self.arch0, self.arch1, self.arch2):
            assert len(ir.aux_outputs) == 3
            assert all(ir.node(i).kind == "aux-classifier" for i in ir.aux_outputs)
            assert all(ir.node(i).removable for i in ir.aux_outputs)
            assert any(n.kind == "aux-cell-op" for n in ir.nodes)

    def test_classifier_aux_mode(self):
        ir = build(decode(ARCH0), SOURCES, 16, 5, aux_mode="classifier")
        assert len(ir.aux_outputs) == 3
        assert not any(n.kind == "aux-cell-op" for n in ir.nodes)
        for k, i in enumerate(ir.aux_outputs):
            assert ir.node(i).inputs == (ir.block_outputs[k],)

    def test_no_aux(self):
        for ir in (build(decode(ARCH0), SOURCES, 16, 5, with_aux=False), build(decode(ARCH0), SOURCES, 16, 5, aux_mode="none")):
            assert ir.aux_outputs == ()
            assert not any(n.removable for n in ir.nodes)
            assert ir.aux_mode == "none"

    def test_topological_order(self):
        for ir in (self.arch0, self.arch1, self.arch2):
            order = check_acyclic(ir)
            assert sorted(order) == [n.id for n in ir.nodes]
            assert all(all(i < n.id for i in n.inputs) for n in ir.nodes)

    def test_deterministic(self):
        assert build(decode(ARCH2), SOURCES, 16, 5) == self.arch2

    def test_wrong_source_count(self):
        with pytest.raises(ShapeError):
            build(decode(ARCH0), SOURCES[:3], 16, 5)

    def test_sources_must_go_shallow_to_deep(self):
        with pytest.raises(ShapeError):
            build(decode(ARCH0), list(reversed(SOURCES)), 16, 5)

    def test_bad_feature_desc(self):
        with pytest.raises(ShapeError):
            FeatureDesc(0, 4, 4)
        with pytest.raises(ShapeError):
            FeatureDesc(8, 4, 4, 3)


class TestStripAux:
    def test_equals_graph_built_without_aux(self):
        for seed in range(20):
            genome = sample_uniform(seed)
            for aux_mode in ("cell", "classifier"):
                full = build(genome, SOURCES, 16, 5, aux_mode=aux_mode)
                assert strip_aux(full) == build(genome, SOURCES, 16, 5, with_aux=False)

    def test_main_path_is_untouched(self):
        full = build(decode(ARCH1), SOURCES, 16, 5)
        stripped = strip_aux(full)
        assert stripped.main_output == full.main_output
        assert not any(n.removable for n in stripped.nodes)
        assert stripped.aux_outputs == ()
        assert estimate(stripped) == estimate(full)
        assert output_resolution(stripped, INPUT) == output_resolution(full, INPUT)
        check_acyclic(stripped)

    def test_idempotent(self):
        stripped = strip_aux(build(decode(ARCH0), SOURCES, 16, 5))
        assert strip_aux(stripped) is stripped
