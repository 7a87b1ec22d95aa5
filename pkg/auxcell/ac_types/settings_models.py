# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""


from typing import List, Tuple
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .ac_literals import AuxMode, DType, KdSource, PSchedule, SearchMode


class CustomBaseModel(BaseModel):
    """
    Extends the BaseModel class of Pydantic to add some useful methods.
    Unknown keys are rejected everywhere in the settings tree.
    """

    model_config = ConfigDict(extra="forbid")

    def __getitem__(self, item):
        return getattr(self, item)

    def __str__(self) -> str:
        return str(self.model_dump())

    def get(self, item, default=None):
        return getattr(self, item, default)


class SyntheticTaskSettingsModel(CustomBaseModel):
    """
    Defines the synthetic dense labelling task.
    """

    image_size: int = Field(48, title="Image Size", description="Height and width of the square images, divisible by 16")
    num_classes: int = Field(5, title="Number of Classes", description="Number of classes, background included")
    min_shapes: int = Field(1, title="Min Shapes", description="Minimum number of shapes drawn per image")
    max_shapes: int = Field(4, title="Max Shapes", description="Maximum number of shapes drawn per image")
    noise: float = Field(0.1, title="Noise", description="Standard deviation of the Gaussian pixel noise")
    train_pool_size: int = Field(192, title="Train Pool Size", description="Images split into meta-train and meta-val")
    val_fraction: float = Field(0.1, title="Meta-val Fraction", description="Fraction of the train pool kept for meta-val")
    holdout_size: int = Field(64, title="Holdout Size", description="Images never seen during the search")
    seed: int = Field(0, title="Task Seed", description="Seed of the dataset generator")

    @field_validator("image_size")
    @classmethod
    def _divisible_by_16(cls, value: int) -> int:
        if value < 16 or value % 16 != 0:
            raise ValueError(f"image_size must be a positive multiple of 16, got {value}")
        return value

    @model_validator(mode="after")
    def _check_ranges(self):
        if self.num_classes < 2 or self.num_classes > 5:
            raise ValueError("num_classes must be in [2, 5]: background plus up to four shape classes")
        if not 0 <= self.min_shapes <= self.max_shapes:
            raise ValueError("min_shapes must be in [0, max_shapes]")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        return self


class EncoderSettingsModel(CustomBaseModel):
    """
    Defines the fixed encoder stub.
    """

    channels: Tuple[int, int, int, int] = Field((8, 16, 24, 32), title="Stage Channels", description="Output channels of the four stages")
    seed: int = Field(0, title="Encoder Seed", description="Seed of the encoder initialisation")
    prefit_epochs: int = Field(3, title="Pre-fit Epochs", description="Epochs of the brief supervised pre-fit")
    prefit_lr: float = Field(3e-3, title="Pre-fit Learning Rate", description="Adam learning rate of the pre-fit")


class TeacherSettingsModel(CustomBaseModel):
    """
    Defines the knowledge distillation teacher.
    """

    genome: str = Field(
        "[[[2,3],[1,4],[0,5]],[1,[1,1,1,9],[4,0,1,9],[7,1,9,1]]]",
        title="Teacher Genome",
        description="Fixed hand written decoder used as the teacher",
    )
    adapt_channels: int = Field(32, title="Adapt Channels", description="Width of the teacher decoder")
    min_reward: float = Field(0.75, title="Min Reward", description="Holdout reward the teacher must reach")
    max_epochs: int = Field(30, title="Max Epochs", description="Training budget of the teacher")
    lr: float = Field(3e-3, title="Learning Rate", description="Adam learning rate of the teacher")
    kd_source: KdSource = Field("cached", title="KD Source", description="Read teacher logits from the cache or recompute them")


class NetworkSettingsModel(CustomBaseModel):
    """
    Defines the shared network hyper-parameters.
    """

    search_adapt_channels: int = Field(16, title="Search Adapt Channels", description="Adapt 1x1 width during the search")
    train_adapt_channels: int = Field(24, title="Train Adapt Channels", description="Adapt 1x1 width during full training")
    dtype: DType = Field("float32", title="DType", description="Floating point precision of training runs")
    batch_norm_momentum: float = Field(0.1, title="BN Momentum", description="Running statistics momentum")
    batch_norm_eps: float = Field(1e-5, title="BN Epsilon", description="Batch norm epsilon")
    ignore_index: int = Field(255, title="Ignore Index", description="Mask label excluded from losses and metrics")
    batch_size: int = Field(16, title="Batch Size", description="Mini-batch size of every inner training loop")
    adam_beta1: float = Field(0.9, title="Adam Beta1")
    adam_beta2: float = Field(0.99, title="Adam Beta2")
    adam_eps: float = Field(1e-3, title="Adam Epsilon")


class ControllerSettingsModel(CustomBaseModel):
    """
    Defines the recurrent controller and its PPO optimiser.
    """

    layers: int = Field(2, title="LSTM Layers")
    hidden: int = Field(100, title="Hidden Units")
    embed_dim: int = Field(32, title="Embedding Size")
    lr: float = Field(1e-4, title="Learning Rate")
    ppo_clip: float = Field(0.2, title="PPO Clip")
    ppo_epochs: int = Field(3, title="PPO Epochs")
    batch_size: int = Field(8, title="Rollouts per Update")
    baseline_decay: float = Field(0.95, title="Baseline EMA Decay")
    entropy_coeff: float = Field(1e-4, title="Entropy Bonus")
    init_range: float = Field(0.1, title="Uniform Init Range")
    seed: int = Field(0, title="Controller Seed")


class SearchSettingsModel(CustomBaseModel):
    """
    Defines the outer search loop and the progressive inner training.
    """

    mode: SearchMode = Field("rl", title="Search Mode")
    total_architectures: int = Field(300, title="Total Architectures")
    stage1_epochs: int = Field(5, title="Stage 1 Epochs")
    stage2_epochs: int = Field(1, title="Stage 2 Epochs")
    p_start: float = Field(0.9, title="Initial Continue Probability")
    p_end: float = Field(0.5, title="Final Continue Probability")
    p_schedule: PSchedule = Field("linear", title="Continue Probability Schedule")
    polyak_decays: Tuple[float, float] = Field((0.9, 0.99), title="Polyak Decays per Stage")
    kd_coeff: float = Field(0.3, title="KD Coefficient")
    aux_coeff: float = Field(0.3, title="Aux Coefficient")
    polyak: bool = Field(True, title="Polyak Averaging")
    kd: bool = Field(True, title="Knowledge Distillation")
    aux_mode: AuxMode = Field("cell", title="Intermediate Supervision")
    decoder_lr: float = Field(3e-3, title="Decoder Adam Learning Rate")
    encoder_lr: float = Field(1e-3, title="Encoder SGD Learning Rate")
    encoder_momentum: float = Field(0.9, title="Encoder SGD Momentum")
    workers: int = Field(1, title="Worker Threads")
    seed: int = Field(0, title="Search Seed")
    top_k: int = Field(10, title="Top K")

    @model_validator(mode="after")
    def _check_probabilities(self):
        for name in ("p_start", "p_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        return self


class FullTrainSettingsModel(CustomBaseModel):
    """
    Defines the longer multi-stage training of a single genome.
    """

    stage_epochs: List[int] = Field([4, 3, 3, 2], title="Epochs per Stage")
    aux_coeffs: List[float] = Field([0.3, 0.25, 0.2, 0.15], title="Aux Coefficient per Stage")
    aux_mode: AuxMode = Field("cell", title="Intermediate Supervision")
    decoder_lr: float = Field(3e-3, title="Decoder Adam Learning Rate")
    encoder_lr: float = Field(1e-3, title="Encoder SGD Learning Rate")
    freeze_bn_halfway: bool = Field(True, title="Freeze BN Halfway Through the Last Stage")
    seed: int = Field(0, title="Full Training Seed")

    @model_validator(mode="after")
    def _check_stages(self):
        if len(self.stage_epochs) != len(self.aux_coeffs):
            raise ValueError("stage_epochs and aux_coeffs must have the same length")
        if not self.stage_epochs:
            raise ValueError("at least one training stage is required")
        return self


class AblationSettingsModel(CustomBaseModel):
    """
    Defines the component ablation study.
    """

    architectures: int = Field(20, title="Architectures per Setup")
    significance: float = Field(0.1, title="Sign Test Significance")
    seed: int = Field(0, title="Ablation Seed")


class AuxCellSettingsModel(CustomBaseModel):
    """
    This class is used to define the global settings for AuxCell.
    """

    task: SyntheticTaskSettingsModel = Field(default_factory=SyntheticTaskSettingsModel)
    encoder: EncoderSettingsModel = Field(default_factory=EncoderSettingsModel)
    teacher: TeacherSettingsModel = Field(default_factory=TeacherSettingsModel)
    network: NetworkSettingsModel = Field(default_factory=NetworkSettingsModel)
    controller: ControllerSettingsModel = Field(default_factory=ControllerSettingsModel)
    search: SearchSettingsModel = Field(default_factory=SearchSettingsModel)
    full_train: FullTrainSettingsModel = Field(default_factory=FullTrainSettingsModel)
    ablation: AblationSettingsModel = Field(default_factory=AblationSettingsModel)
