import numpy as np
import pytest

from auxcell import SearchSettingsModel
from auxcell.search import RunningMean, p_at, should_continue

from .records import make_record


class TestRunningMean:
    def test_update(self):
        running = RunningMean()
        for value in (0.2, 0.4, 0.9):
            running.update(value)
        assert running.count == 3
        assert running.mean == pytest.approx(0.5)

    def test_replay_and_history(self):
        records = [make_record(i, r) for i, r in enumerate((0.2, 0.0, 0.4, 0.6))]
        assert RunningMean.replay(records).mean == pytest.approx(0.3)
        assert RunningMean.history(records) == pytest.approx([0.0, 0.2, 0.1, 0.2])


class TestContinueProbability:
    def test_linear_schedule(self):
        settings = SearchSettingsModel(total_architectures=300, p_start=0.9, p_end=0.5)
        assert p_at(0, settings) == pytest.approx(0.9)
        assert p_at(299, settings) == pytest.approx(0.5)
        assert p_at(150, settings) == pytest.approx(0.9 - 0.4 * 150 / 299)
        assert p_at(1000, settings) == pytest.approx(0.5)

    def test_constant_schedule(self):
        settings = SearchSettingsModel(p_schedule="constant", p_start=0.7)
        assert p_at(0, settings) == p_at(250, settings) == 0.7

    def test_single_architecture(self):
        assert p_at(0, SearchSettingsModel(total_architectures=1, p_start=0.8)) == 0.8


class TestShouldContinue:
    def setup_class(self):
        self.running = RunningMean(count=4, mean=0.5)

    def test_first_architecture_always_continues(self):
        assert should_continue(0.0, RunningMean(), 0.0, np.random.default_rng(0))

    def test_above_the_mean_never_stops(self):
        rng = np.random.default_rng(0)
        state = rng.bit_generator.state
        assert all(should_continue(0.51, self.running, 0.0, rng) for _ in range(100))
        assert rng.bit_generator.state == state

    def test_probability_bounds(self):
        rng = np.random.default_rng(1)
        assert not any(should_continue(0.4, self.running, 0.0, rng) for _ in range(100))
        assert all(should_continue(0.5, self.running, 1.0, rng) for _ in range(100))

    def test_termination_frequency(self):
        rng = np.random.default_rng(2)
        stops = sum(not should_continue(0.3, self.running, 0.9, rng) for _ in range(10_000))
        assert abs(stops / 10_000 - 0.10) < 0.01
