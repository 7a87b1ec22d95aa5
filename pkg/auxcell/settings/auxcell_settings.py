# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""


from json import load
import logging
from pathlib import Path
from typing import Dict, Union
from auxcell.ac_types import AuxCellSettingsModel


def get_settings(new_settings_file: Union[Path, None] = None) -> AuxCellSettingsModel:
    """
    This function is used to get the settings from the settings file.
    If no settings file is passed as argument, or the file is not found, it will fallback to:
    - The system wide config file, located in ~/.config/auxcell/ac.config.json
    - The default config file, located in the package folder

    Args:
        new_settings_file (Union[Path, None], optional): The path of the settings file. Defaults to None.

    Returns:
        AuxCellSettingsModel: The validated settings
    """

    # Config path we passed as argument
    if new_settings_file is not None:
        settings_file = Path(new_settings_file)

        if not settings_file.exists():
            raise FileNotFoundError(f"File {settings_file} does not exist")

    # System wide config path
    else:
        home_folder = Path.home()
        settings_file = home_folder / ".config" / "auxcell" / "ac.config.json"

    # Fallback to the default config in the package
    if not settings_file.exists():
        settings_file = Path(__file__).parent / "ac.config.json"

    logging.debug(f"AuxCell config file path: {settings_file}")
    with open(settings_file, "r", encoding="utf8") as f:
        settings_dict = load(f)

    return AuxCellSettingsModel(**settings_dict)


def _deep_merge(base: Dict, new: Dict) -> Dict:
    merged = dict(base)
    for key, value in new.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def merge_settings(settings: AuxCellSettingsModel, new_settings: Dict) -> AuxCellSettingsModel:
    """
    This function is used to merge a partial settings dict into existing settings,
    section by section, so a single key can be overridden without restating its section.

    Args:
        settings (AuxCellSettingsModel): The current settings
        new_settings (Dict): The partial settings to apply

    Returns:
        AuxCellSettingsModel: The new settings, validated again
    """
    new_settings_dict = _deep_merge(settings.model_dump(), new_settings)
    return AuxCellSettingsModel(**new_settings_dict)


if __name__ == "__main__":
    from auxcell.utilities import setup_logging
    setup_logging(level="debug")

    print(get_settings())
