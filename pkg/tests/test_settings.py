import json

import pytest
from pydantic import ValidationError

from auxcell import AuxCellSettingsModel
from auxcell.settings import get_settings, merge_settings


def test_packaged_defaults(monkeypatch, tmp_path):
    monkeypatch.setenv("HOME", str(tmp_path))
    settings = get_settings()
    assert isinstance(settings, AuxCellSettingsModel)
    assert settings.search.mode == "rl"
    assert settings.full_train.stage_epochs == [4, 3, 3, 2]
    assert settings.search.p_start == 0.9 and settings.search.p_end == 0.5


def test_user_config_is_preferred(monkeypatch, tmp_path):
    monkeypatch.setenv("HOME", str(tmp_path))
    defaults = get_settings()
    config = tmp_path / ".config" / "auxcell" / "ac.config.json"
    config.parent.mkdir(parents=True)
    data = defaults.model_dump(mode="json")
    data["search"]["seed"] = 7
    config.write_text(json.dumps(data))
    assert get_settings().search.seed == 7


def test_explicit_file(tmp_path):
    path = tmp_path / "custom.json"
    data = get_settings().model_dump(mode="json")
    data["task"]["num_classes"] = 4
    path.write_text(json.dumps(data))
    assert get_settings(path).task.num_classes == 4

    with pytest.raises(FileNotFoundError):
        get_settings(tmp_path / "missing.json")


def test_merge_keeps_the_rest_of_a_section():
    settings = get_settings()
    merged = merge_settings(settings, {"search": {"total_architectures": 12}})
    assert merged.search.total_architectures == 12
    assert merged.search.stage1_epochs == settings.search.stage1_epochs
    assert settings.search.total_architectures == 300


def test_validation():
    settings = get_settings()
    with pytest.raises(ValidationError):
        merge_settings(settings, {"search": {"unknown_key": 1}})
    with pytest.raises(ValidationError):
        merge_settings(settings, {"search": {"workers": 0}})
    with pytest.raises(ValidationError):
        merge_settings(settings, {"full_train": {"stage_epochs": [1, 2]}})
    with pytest.raises(ValidationError):
        merge_settings(settings, {"search": {"mode": "evolution"}})


def test_item_access():
    settings = get_settings()
    assert settings["search"]["mode"] == settings.search.mode
