import numpy as np
import pytest

from auxcell import MetricError, ShapeError
from auxcell.metrics import ConfusionMatrix, reward, spearman


HAND_COMPUTED = [[2, 0, 0], [0, 3, 1], [0, 1, 3]]


class TestConfusionMatrix:
    def setup_class(self):
        self.cm = ConfusionMatrix.from_counts(HAND_COMPUTED)

    def test_hand_computed_metrics(self):
        metrics = self.cm.metrics()
        assert metrics.miou == pytest.approx(0.6)
        assert metrics.fwiou == pytest.approx(0.6)
        assert metrics.mpa == pytest.approx(0.75)
        assert metrics.reward == pytest.approx(0.6463, abs=1e-4)
        assert reward(self.cm) == metrics.reward

    def test_background_is_excluded(self):
        counts = np.array(HAND_COMPUTED)
        counts[0, 0] = 1000
        assert reward(ConfusionMatrix.from_counts(counts)) == reward(self.cm)

    def test_absent_classes_are_skipped(self):
        counts = np.zeros((4, 4), dtype=np.int64)
        counts[:3, :3] = HAND_COMPUTED
        counts[1, 3] = 0
        assert reward(ConfusionMatrix.from_counts(counts)) == pytest.approx(reward(self.cm))

    def test_class_permutation_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            counts = rng.integers(0, 50, size=(5, 5))
            counts[1:, 1:] += np.eye(4, dtype=np.int64)
            order = np.concatenate([[0], 1 + rng.permutation(4)])
            permuted = counts[np.ix_(order, order)]
            assert reward(ConfusionMatrix.from_counts(permuted)) == reward(ConfusionMatrix.from_counts(counts))

    def test_perfect_prediction(self):
        assert reward(ConfusionMatrix.from_counts(np.diag([5, 3, 2]))) == pytest.approx(1.0)

    def test_update_skips_ignored_pixels(self):
        target = np.array([[[0, 1], [2, 255]]])
        prediction = np.array([[[0, 1], [1, 2]]])
        cm = ConfusionMatrix(3).update(prediction, target)
        assert cm.total == 3
        np.testing.assert_array_equal(cm.counts, [[1, 0, 0], [0, 1, 0], [0, 1, 0]])

    def test_update_accumulates(self):
        target = np.array([[[0, 1], [2, 2]]])
        cm = ConfusionMatrix(3).update(target, target).update(target, target)
        np.testing.assert_array_equal(cm.counts, np.diag([2, 2, 4]))

    def test_merge(self):
        merged = self.cm.merge(self.cm)
        np.testing.assert_array_equal(merged.counts, 2 * np.array(HAND_COMPUTED))
        assert reward(merged) == pytest.approx(reward(self.cm))
        with pytest.raises(MetricError):
            self.cm.merge(ConfusionMatrix(4))

    def test_errors(self):
        with pytest.raises(MetricError):
            reward(ConfusionMatrix.from_counts([[5, 0], [0, 0]]))
        with pytest.raises(MetricError):
            ConfusionMatrix.from_counts([[1, 2, 3]])
        with pytest.raises(MetricError):
            ConfusionMatrix.from_counts([[1, -1], [0, 1]])
        with pytest.raises(ShapeError):
            ConfusionMatrix(3).update(np.zeros((1, 2, 2), dtype=int), np.zeros((1, 2, 3), dtype=int))


class TestSpearman:
    def test_hand_computed(self):
        assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)

    def test_monotone(self):
        assert spearman([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0)
        assert spearman([1, 2, 3], [0.3, 0.2, 0.1]) == pytest.approx(-1.0)

    def test_ties_get_average_ranks(self):
        assert spearman([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(0.9486832980505138)

    def test_errors(self):
        for xs, ys in (([1, 2], [1, 2, 3]), ([1], [1]), ([1, 1, 1], [1, 2, 3]), ([1, 2, 3], [5, 5, 5])):
            with pytest.raises(MetricError):
                spearman(xs, ys)
