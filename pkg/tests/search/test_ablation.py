import numpy as np

from auxcell.search import SETUPS, run_ablation, sign_test

from ..helpers import tiny_artifacts, tiny_settings


class TestSignTest:
    def test_all_wins(self):
        test = sign_test(np.array([1.0, 2.0, 3.0]), np.zeros(3), 0.2, "kd")
        assert test.wins == 3 and test.trials == 3
        assert abs(test.p_value - 0.125) < 1e-12
        assert test.significant
        assert test.margin == 2.0

    def test_ties_are_dropped(self):
        test = sign_test(np.array([0.5, 0.4, 0.7]), np.array([0.5, 0.4, 0.6]), 0.1, "aux")
        assert test.trials == 1 and test.wins == 1
        assert test.p_value == 0.5
        assert not test.significant

    def test_no_trials(self):
        test = sign_test(np.ones(4), np.ones(4), 0.1, "polyak")
        assert test.trials == 0
        assert test.p_value == 1.0
        assert not test.significant


class TestRunAblation:
    def setup_class(self):
        self.result = run_ablation(tiny_artifacts(), tiny_settings(), architectures=2)

    def test_rows(self):
        rows = self.result.rows
        assert len(rows) == 2 * len(SETUPS)
        for index in range(2):
            genomes = {row["genome"] for row in rows if row["index"] == index}
            assert len(genomes) == 1
            assert {row["setup"] for row in rows if row["index"] == index} == set(SETUPS)
        assert all(0.0 <= row["reward1"] <= 1.0 for row in rows)

    def test_components_against_baseline(self):
        assert [t.component for t in self.result.tests] == ["polyak", "kd", "aux", "all"]
        assert all(t.trials <= 2 for t in self.result.tests)
        assert len(self.result.rewards("kd")) == 2

    def test_table(self):
        table = self.result.get_table()
        assert "Margin" in table
        assert "polyak" in table and "all" in table

    def test_deterministic(self):
        again = run_ablation(tiny_artifacts(), tiny_settings(), architectures=1, setups={"baseline": SETUPS["baseline"]})
        assert again.rows[0] == self.result.rows[0]
        assert again.tests == []
