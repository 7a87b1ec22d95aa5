from .auxcell_settings import AuxCellSettingsModel, get_settings, merge_settings
