from dataclasses import replace

import numpy as np
import pytest

from auxcell import AblationFlagsModel, AuxCellException, NonFiniteError, SearchSettingsModel
from auxcell.genome import ARCH0, ARCH2, decode
from auxcell.search import evaluate_stage1, evaluate_stage2, search_loss_spec
from auxcell.search import progressive
from auxcell.tasks import LiveEncoderFeatures, SyntheticDataset

from ..helpers import tiny_artifacts, tiny_settings


NO_KD = AblationFlagsModel(polyak=True, kd=False, aux_mode="cell")
BARE = AblationFlagsModel(polyak=False, kd=False, aux_mode="none")


class TestLossSpec:
    def test_distillation_only_when_allowed(self):
        search = SearchSettingsModel(kd_coeff=0.3, aux_coeff=0.25)
        flags = AblationFlagsModel()
        assert search_loss_spec(search, flags, distill=True).kd_coeff == 0.3
        assert search_loss_spec(search, flags, distill=False).kd_coeff == 0.0
        assert search_loss_spec(search, NO_KD, distill=True).kd_coeff == 0.0

    def test_aux_coefficients(self):
        search = SearchSettingsModel(aux_coeff=0.25)
        assert search_loss_spec(search, AblationFlagsModel(), True).aux_coeffs == [0.25] * 3
        assert search_loss_spec(search, BARE, True).aux_coeffs == []


class TestProgressiveStages:
    def setup_class(self):
        self.settings = tiny_settings()
        self.artifacts = tiny_artifacts()
        self.genome = decode(ARCH2)
        self.fingerprint = self.artifacts.encoder.fingerprint()
        self.stage1 = evaluate_stage1(self.genome, self.artifacts, self.settings, np.random.default_rng(0))

    def test_stage1(self):
        result = self.stage1
        assert not result.failed
        assert 0.0 <= result.reward <= 1.0
        assert result.reward == result.metrics.reward
        assert result.net is not None and not result.net.store.swapped
        assert len(result.history) == self.settings.search.stage1_epochs

    def test_stage1_distills(self):
        assert "kd" in self.stage1.history[0]
        no_kd = evaluate_stage1(self.genome, self.artifacts, self.settings, np.random.default_rng(0), NO_KD)
        assert "kd" not in no_kd.history[0]

    def test_stage1_is_deterministic(self):
        again = evaluate_stage1(self.genome, self.artifacts, self.settings, np.random.default_rng(0))
        assert again.reward == self.stage1.reward

    def test_without_aux_heads(self):
        result = evaluate_stage1(self.genome, self.artifacts, self.settings, np.random.default_rng(0), BARE)
        assert not result.net.ir.has_aux
        assert "aux0" not in result.history[0]

    def test_stage2(self):
        stage1 = evaluate_stage1(decode(ARCH0), self.artifacts, self.settings, np.random.default_rng(1))
        stage2 = evaluate_stage2(decode(ARCH0), stage1, self.artifacts, self.settings, np.random.default_rng(2))
        assert not stage2.failed
        assert 0.0 <= stage2.reward <= 1.0
        assert "kd" not in stage2.history[0]
        assert stage2.history[0]["lr_encoder"] == self.settings.search.encoder_lr
        assert stage2.encoder is not self.artifacts.encoder
        assert not stage2.encoder.store.swapped
        assert self.artifacts.encoder.fingerprint() == self.fingerprint

    def test_stage2_needs_stage1(self):
        failed = progressive.StageResult(0.0, None, 0.0, failed=True)
        with pytest.raises(AuxCellException):
            evaluate_stage2(self.genome, failed, self.artifacts, self.settings, np.random.default_rng(0))

    def test_non_finite_loss_fails_the_architecture(self, monkeypatch):
        def diverge(*args, **kwargs):
            raise NonFiniteError("stage1: non finite loss at epoch 1")

        monkeypatch.setattr(progressive, "train_phase", diverge)
        result = evaluate_stage1(self.genome, self.artifacts, self.settings, np.random.default_rng(0))
        assert result.failed and result.reward == 0.0 and result.metrics is None

    def test_cached_features_train_like_live_features(self):
        splits, encoder = self.artifacts.splits, self.artifacts.encoder
        live = replace(
            self.artifacts,
            train_features=LiveEncoderFeatures(encoder, splits.meta_train),
            val_features=LiveEncoderFeatures(encoder, splits.meta_val),
        )
        result = evaluate_stage1(self.genome, live, self.settings, np.random.default_rng(0))
        assert result.history == self.stage1.history
        assert result.reward == self.stage1.reward

    def test_background_only_meta_val_fails_the_architecture(self):
        val = self.artifacts.splits.meta_val
        empty = SyntheticDataset(val.images, np.zeros_like(val.masks), val.ids)
        artifacts = replace(self.artifacts, splits=replace(self.artifacts.splits, meta_val=empty))

        stage1 = evaluate_stage1(self.genome, artifacts, self.settings, np.random.default_rng(0))
        assert stage1.failed and stage1.reward == 0.0 and stage1.metrics is None

        trained = evaluate_stage1(self.genome, self.artifacts, self.settings, np.random.default_rng(3))
        stage2 = evaluate_stage2(self.genome, trained, artifacts, self.settings, np.random.default_rng(1))
        assert stage2.failed and stage2.reward == 0.0
