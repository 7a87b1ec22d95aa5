# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

from dataclasses import dataclass
from typing import Iterable, List

import numpy as np

from auxcell.ac_types import SearchRecordModel, SearchSettingsModel


@dataclass
class RunningMean:
    """
    Mean of the stage-1 rewards seen so far, terminated architectures included.
    """

    count: int = 0
    mean: float = 0.0

    def update(self, value: float) -> None:
        self.count += 1
        self.mean += (value - self.mean) / self.count

    @classmethod
    def replay(cls, records: Iterable[SearchRecordModel]) -> "RunningMean":
        """Rebuilds the running mean from log rows, in log order."""
        running = cls()
        for record in records:
            running.update(record.reward1)
        return running

    @staticmethod
    def history(records: Iterable[SearchRecordModel]) -> List[float]:
        """The mean each row was gated against, as the online loop saw it."""
        running, values = RunningMean(), []
        for record in records:
            values.append(running.mean)
            running.update(record.reward1)
        return values


def p_at(index: int, settings: SearchSettingsModel) -> float:
    """
    Continue probability of a below-mean architecture, annealed linearly from p_start to p_end
    across the run, or held at p_start.
    """
    if settings.p_schedule == "constant" or settings.total_architectures <= 1:
        return settings.p_start
    fraction = min(max(index, 0), settings.total_architectures - 1) / (settings.total_architectures - 1)
    return settings.p_start + (settings.p_end - settings.p_start) * fraction


def should_continue(reward1: float, running: RunningMean, p: float, rng: np.random.Generator) -> bool:
    """
    Above the running mean the architecture always goes on to stage 2, otherwise with probability p.
    The first architecture always continues. The generator is only drawn from below the mean.
    """
    if running.count == 0 or reward1 > running.mean:
        return True
    return bool(rng.random() < p)
