from .auxcell_exception import *
from .ac_literals import *
from .ac_models import *
from .settings_models import (
    AblationSettingsModel,
    AuxCellSettingsModel,
    ControllerSettingsModel,
    EncoderSettingsModel,
    FullTrainSettingsModel,
    NetworkSettingsModel,
    SearchSettingsModel,
    SyntheticTaskSettingsModel,
    TeacherSettingsModel,
)
