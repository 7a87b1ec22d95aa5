import numpy as np
import pytest
from pydantic import ValidationError

from auxcell import SyntheticTaskSettingsModel
from auxcell.tasks import class_frequencies, generate, make_splits

from ..helpers import tiny_settings


class TestSyntheticTask:
    def setup_class(self):
        self.settings = tiny_settings().task
        self.splits = make_splits(self.settings)

    def test_split_sizes(self):
        assert len(self.splits.meta_val) == 6
        assert len(self.splits.meta_train) == 18
        assert len(self.splits.holdout) == 8

    def test_splits_are_disjoint(self):
        train, val, holdout = (set(s.ids.tolist()) for s in (self.splits.meta_train, self.splits.meta_val, self.splits.holdout))
        assert not train & val
        assert not (train | val) & holdout
        assert train | val == set(range(24))

    def test_deterministic(self):
        again = make_splits(self.settings)
        for a, b in ((self.splits.meta_train, again.meta_train), (self.splits.holdout, again.holdout)):
            np.testing.assert_array_equal(a.images, b.images)
            np.testing.assert_array_equal(a.masks, b.masks)
            np.testing.assert_array_equal(a.ids, b.ids)

    def test_seed_changes_the_data(self):
        other = make_splits(self.settings.model_copy(update={"seed": 1}))
        assert not np.array_equal(other.holdout.images, self.splits.holdout.images)

    def test_arrays(self):
        dataset = self.splits.meta_train
        assert dataset.images.shape == (18, 3, 16, 16) and dataset.images.dtype == np.float32
        assert dataset.masks.shape == (18, 16, 16) and dataset.masks.dtype == np.uint8
        assert dataset.masks.max() < 3

    def test_every_image_has_a_shape(self):
        for dataset in (self.splits.meta_train, self.splits.holdout):
            assert np.all((dataset.masks > 0).reshape(len(dataset), -1).any(axis=1))

    def test_zero_shapes(self):
        settings = self.settings.model_copy(update={"min_shapes": 0, "max_shapes": 0})
        dataset = generate(settings, 4, np.random.default_rng(0))
        assert not np.any(dataset.masks)

    def test_class_frequencies(self):
        counts = class_frequencies(self.splits.holdout, 3)
        assert counts.shape == (3,)
        assert counts.sum() == 8 * 16 * 16

    def test_subset(self):
        subset = self.splits.holdout.subset([2, 0])
        np.testing.assert_array_equal(subset.ids, self.splits.holdout.ids[[2, 0]])

    def test_dataset_save_and_load(self, tmp_path):
        from auxcell.tasks import SyntheticDataset

        self.splits.meta_val.save(tmp_path / "meta_val")
        loaded = SyntheticDataset.load(tmp_path / "meta_val")
        np.testing.assert_array_equal(loaded.images, self.splits.meta_val.images)
        np.testing.assert_array_equal(loaded.masks, self.splits.meta_val.masks)


@pytest.mark.parametrize(
    "overrides",
    [{"image_size": 20}, {"image_size": 8}, {"num_classes": 6}, {"min_shapes": 3, "max_shapes": 2}, {"val_fraction": 1.0}],
)
def test_invalid_task_settings(overrides):
    with pytest.raises(ValidationError):
        SyntheticTaskSettingsModel(**overrides)
