import numpy as np
import pytest

from auxcell import AuxCellException, CheckpointError, ControllerSettingsModel
from auxcell.controller import (
    NUM_TOKENS,
    TOKEN_SCHEDULE,
    Controller,
    genome_to_tokens,
    surrogate_grad,
    tokens_to_genome,
)
from auxcell.genome import ARCH0, decode, encode

from ..nn.gradient_check import numeric_grad, sample_indices


SMALL = ControllerSettingsModel(hidden=16, embed_dim=8)


class TestSampling:
    def setup_class(self):
        self.controller = Controller(SMALL)

    def test_schedule(self):
        assert NUM_TOKENS == 19
        assert [valid for _, valid in TOKEN_SCHEDULE[:7]] == [4, 4, 5, 5, 6, 6, 11]
        assert [valid for _, valid in TOKEN_SCHEDULE[7:11]] == [2, 2, 11, 11]
        assert [valid for _, valid in TOKEN_SCHEDULE[15:]] == [8, 8, 11, 11]

    def test_tokens_round_trip(self):
        genome = decode(ARCH0)
        assert tokens_to_genome(genome_to_tokens(genome)) == genome
        assert genome_to_tokens(genome)[:7] == [3, 3, 3, 2, 3, 0, 8]

    def test_masking(self):
        rollout = self.controller.sample(np.random.default_rng(0))
        for t, (_, valid) in enumerate(TOKEN_SCHEDULE):
            probs = self.controller.token_distribution(rollout.tokens[:t])
            assert np.all(probs[valid:] == 0.0)
            assert probs[:valid].sum() == pytest.approx(1.0)
            assert np.all(probs[:valid] > 0.0)

    def test_samples_are_valid_genomes(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            rollout = self.controller.sample(rng)
            assert decode(encode(rollout.genome)) == rollout.genome
            assert genome_to_tokens(rollout.genome) == list(rollout.tokens)
            assert len(rollout.token_logprobs) == NUM_TOKENS

    def test_deterministic(self):
        a = self.controller.sample(np.random.default_rng(7))
        b = self.controller.sample(np.random.default_rng(7))
        assert a.tokens == b.tokens and a.token_logprobs == b.token_logprobs

    def test_same_seed_same_weights(self):
        other = Controller(SMALL)
        for name, value in self.controller.store.values().items():
            np.testing.assert_array_equal(value, other.store[name])

    def test_log_prob_is_the_sum_of_token_log_probs(self):
        rollout = self.controller.sample(np.random.default_rng(2))
        total, per_token = self.controller.log_prob(rollout.genome)
        np.testing.assert_allclose(per_token, rollout.token_logprobs, atol=1e-10)
        assert total == pytest.approx(rollout.log_prob)

    def test_prefix_too_long(self):
        with pytest.raises(AuxCellException):
            self.controller.token_distribution([0] * NUM_TOKENS)


class TestPPO:
    def test_surrogate_clipping(self):
        ratio = np.array([1.5, 0.5, 0.5, 1.5, 1.1])
        advantage = np.array([1.0, 1.0, -1.0, -1.0, 1.0])
        np.testing.assert_allclose(surrogate_grad(ratio, advantage, 0.2), [0.0, 0.5, 0.0, -1.5, 1.1])

    def test_backward_matches_numeric_gradients(self):
        controller = Controller(ControllerSettingsModel(hidden=6, embed_dim=4))
        rng = np.random.default_rng(3)
        tokens = np.array([controller.sample(rng).tokens for _ in range(3)], dtype=np.int64)
        d_logp = rng.normal(size=(3, NUM_TOKENS))
        d_ent = rng.normal(size=(3, NUM_TOKENS))

        def objective():
            logp, entropy, _ = controller._forward(tokens)
            return float(np.sum(d_logp * logp) + np.sum(d_ent * entropy))

        controller.store.zero_grad()
        _, _, cache = controller._forward(tokens)
        controller._backward(cache, d_logp, d_ent)
        for name, slot in controller.store.slots.items():
            indices = sample_indices(slot.value.shape, 6, rng)
            numeric = numeric_grad(objective, slot.value, indices=indices)
            analytic = np.array([slot.grad[i] for i in indices])
            np.testing.assert_allclose(analytic, [numeric[i] for i in indices], rtol=1e-4, atol=1e-7, err_msg=name)

    def test_zero_advantage_leaves_weights(self):
        controller = Controller(ControllerSettingsModel(hidden=16, embed_dim=8, entropy_coeff=0.0))
        rng = np.random.default_rng(4)
        rollouts = [controller.sample(rng) for _ in range(8)]
        before = {k: v.copy() for k, v in controller.store.values().items()}
        diagnostics = controller.ppo_update(rollouts, [0.5] * 8)
        assert diagnostics["mean_advantage"] == 0.0
        assert controller.baseline == pytest.approx(0.5)
        for name, value in controller.store.values().items():
            np.testing.assert_array_equal(value, before[name])

    def test_positive_advantage_raises_log_prob(self):
        controller = Controller(ControllerSettingsModel(hidden=16, embed_dim=8, lr=1e-3))
        controller.baseline = 0.0
        rollout = controller.sample(np.random.default_rng(5))
        before = controller.log_prob(rollout.genome)[0]
        controller.ppo_update([rollout], [1.0])
        assert controller.log_prob(rollout.genome)[0] > before
        assert controller.updates == 1

    def test_baseline_is_updated_after_the_advantage(self):
        controller = Controller(SMALL)
        controller.baseline = 0.2
        rollouts = [controller.sample(np.random.default_rng(6)) for _ in range(2)]
        diagnostics = controller.ppo_update(rollouts, [0.6, 0.6])
        assert diagnostics["mean_advantage"] == pytest.approx(0.4)
        assert controller.baseline == pytest.approx(0.6 - 0.4 * 0.95**2)

    def test_missing_rewards(self):
        controller = Controller(SMALL)
        with pytest.raises(AuxCellException):
            controller.ppo_update([])
        with pytest.raises(AuxCellException):
            controller.ppo_update([controller.sample(np.random.default_rng(0))])

    def test_bandit(self):
        """Rewarding one first decision concentrates the policy on it."""
        controller = Controller(ControllerSettingsModel(hidden=32, embed_dim=8, lr=3e-3))
        rng = np.random.default_rng(8)
        start = controller.token_distribution()[3]
        for _ in range(80):
            rollouts = [controller.sample(rng) for _ in range(8)]
            controller.ppo_update(rollouts, [1.0 if r.tokens[0] == 3 else 0.0 for r in rollouts])
        assert controller.token_distribution()[3] > start + 0.1


class TestControllerCheckpoint:
    def test_round_trip(self, tmp_path):
        controller = Controller(SMALL)
        rng = np.random.default_rng(9)
        rollouts = [controller.sample(rng) for _ in range(4)]
        controller.ppo_update(rollouts, [0.1, 0.2, 0.3, 0.4])
        controller.save(tmp_path / "controller", rng)

        loaded, loaded_rng = Controller.load(tmp_path / "controller")
        assert loaded.baseline == controller.baseline
        assert loaded.updates == 1
        assert loaded.settings == controller.settings
        for name, slot in controller.store.slots.items():
            np.testing.assert_array_equal(loaded.store.slots[name].value, slot.value)
            np.testing.assert_array_equal(loaded.store.slots[name].state["m"], slot.state["m"])
        assert loaded.sample(loaded_rng).tokens == controller.sample(rng).tokens

    def test_without_rng(self, tmp_path):
        Controller(SMALL).save(tmp_path / "controller")
        _, rng = Controller.load(tmp_path / "controller")
        assert rng is None

    def test_wrong_kind(self, tmp_path):
        from auxcell.nn import save_arrays

        save_arrays(tmp_path / "other", {"a": np.zeros(1)}, kind="params")
        with pytest.raises(CheckpointError):
            Controller.load(tmp_path / "other")
