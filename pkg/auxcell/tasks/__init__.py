from .synthetic import CLASS_SHAPES, PALETTE, SyntheticDataset, TaskSplits, class_frequencies, draw_sample, generate, make_splits
from .encoder_stub import EncoderStub
from .features import FeatureCache, LiveEncoderFeatures, precompute_encoder
from .teacher import CachedTeacherLogits, OnlineTeacherLogits, Teacher, build_teacher
from .artifacts import TaskArtifacts, prepare_task, task_key
