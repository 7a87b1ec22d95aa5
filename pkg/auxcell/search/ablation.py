# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.stats import binomtest
from terminaltables import AsciiTable

from auxcell.ac_types import AblationFlagsModel, AuxCellSettingsModel
from auxcell.genome import encode, sample_uniform
from auxcell.search.progressive import evaluate_stage1, evaluate_stage2
from auxcell.tasks import TaskArtifacts
from auxcell.utilities import child_rng


SETUPS: Dict[str, AblationFlagsModel] = {
    "baseline": AblationFlagsModel(polyak=False, kd=False, aux_mode="none"),
    "polyak": AblationFlagsModel(polyak=True, kd=False, aux_mode="none"),
    "kd": AblationFlagsModel(polyak=False, kd=True, aux_mode="none"),
    "aux": AblationFlagsModel(polyak=False, kd=False, aux_mode="cell"),
    "all": AblationFlagsModel(polyak=True, kd=True, aux_mode="cell"),
}

# Each component setup is compared against the baseline
COMPARISONS = ("polyak", "kd", "aux", "all")


@dataclass
class ComponentTest:
    component: str
    mean_on: float
    mean_off: float
    wins: int
    trials: int
    p_value: float
    significant: bool

    @property
    def margin(self) -> float:
        return self.mean_on - self.mean_off


@dataclass
class AblationResult:
    rows: List[Dict] = field(default_factory=list)
    tests: List[ComponentTest] = field(default_factory=list)

    def rewards(self, setup: str, key: str = "reward1") -> np.ndarray:
        return np.array([row[key] for row in self.rows if row["setup"] == setup])

    def get_table(self) -> str:
        data = [["Component", "Mean on", "Mean off", "Margin", "Wins", "p-value", "Significant"]] + [
            [
                t.component,
                round(t.mean_on, 4),
                round(t.mean_off, 4),
                round(t.margin, 4),
                f"{t.wins}/{t.trials}",
                round(t.p_value, 4),
                "yes" if t.significant else "no",
            ]
            for t in self.tests
        ]
        return AsciiTable(data).table


def sign_test(on: np.ndarray, off: np.ndarray, significance: float, component: str) -> ComponentTest:
    """
    One sided sign test of "component on >= component off" over paired rewards, ties dropped.
    """
    diff = on - off
    wins, trials = int(np.sum(diff > 0)), int(np.sum(diff != 0))
    p_value = binomtest(wins, trials, 0.5, alternative="greater").pvalue if trials else 1.0
    return ComponentTest(
        component,
        float(on.mean()),
        float(off.mean()),
        wins,
        trials,
        float(p_value),
        bool(diff.mean() >= 0 and p_value < significance),
    )


def run_ablation(
    artifacts: TaskArtifacts,
    settings: AuxCellSettingsModel,
    architectures: Optional[int] = None,
    setups: Optional[Dict[str, AblationFlagsModel]] = None,
) -> AblationResult:
    """
    Trains the same uniformly sampled architectures under every setup, stage 1 and then stage 2
    unconditionally, and tests each component against the baseline on the stage-1 rewards.

    Architecture i uses the same sampling and training generators under every setup, so the
    rewards are paired.
    """
    setups = setups if setups is not None else SETUPS
    seed = settings.ablation.seed
    count = architectures if architectures is not None else settings.ablation.architectures
    result = AblationResult()

    for index in range(count):
        genome = sample_uniform(child_rng(seed, index, 0))
        for name, flags in setups.items():
            stage1 = evaluate_stage1(genome, artifacts, settings, child_rng(seed, index, 2), flags)
            stage2 = None if stage1.failed else evaluate_stage2(genome, stage1, artifacts, settings, child_rng(seed, index, 3), flags)
            row = {
                "index": index,
                "genome": encode(genome),
                "setup": name,
                "reward1": stage1.reward,
                "reward2": stage2.reward if stage2 is not None else 0.0,
                "failed": stage1.failed or (stage2 is not None and stage2.failed),
            }
            result.rows.append(row)
            logging.info(f"Ablation {index + 1}/{count} {name}: reward1={row['reward1']:.4f} reward2={row['reward2']:.4f}")

    if "baseline" in setups:
        off = result.rewards("baseline")
        for component in COMPARISONS:
            if component in setups:
                test = sign_test(result.rewards(component), off, settings.ablation.significance, component)
                result.tests.append(test)
                logging.info(f"Component {component}: margin={test.margin:.4f} p={test.p_value:.4f}")
    return result
