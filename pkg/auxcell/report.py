# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from terminaltables import AsciiTable

from auxcell.ac_types import MetricError, SearchHeaderModel, SearchRecordModel
from auxcell.metrics import spearman
from auxcell.search.search_log import SearchLog


WINDOW = 50


@dataclass
class SearchRun:
    path: Path
    header: SearchHeaderModel
    records: List[SearchRecordModel]

    @property
    def name(self) -> str:
        return self.path.stem

    @property
    def mode(self) -> str:
        return self.header.mode


def window_rows(run: SearchRun, window: int = WINDOW) -> List[Dict]:
    """One row per window of consecutive architecture indices."""
    records = sorted(run.records, key=lambda r: r.index)
    rows = []
    for start in range(0, len(records), window):
        chunk = records[start : start + window]
        rows.append(
            {
                "mode": run.mode,
                "log": run.name,
                "window_start": chunk[0].index,
                "window_end": chunk[-1].index,
                "count": len(chunk),
                "mean_final_reward": float(np.mean([r.final_reward for r in chunk])),
                "mean_reward1": float(np.mean([r.reward1 for r in chunk])),
                "advance_rate": float(np.mean([r.continued for r in chunk])),
                "mean_p": float(np.mean([r.p_at_decision for r in chunk])),
            }
        )
    return rows


def stage_correlation(records: Sequence[SearchRecordModel]) -> Optional[float]:
    """Spearman rho between stage-1 and stage-2 rewards of the architectures that ran both, None when undefined."""
    pairs = [(r.reward1, r.reward2) for r in records if r.reward2 is not None and not r.failed]
    if len(pairs) < 2:
        return None
    try:
        return spearman([p[0] for p in pairs], [p[1] for p in pairs])
    except MetricError:
        return None


def last_window_mean(records: Sequence[SearchRecordModel], window: int = WINDOW) -> float:
    records = sorted(records, key=lambda r: r.index)[-window:]
    return float(np.mean([r.final_reward for r in records]))


class SearchReport:
    """
    Summary of one or more complete search logs: reward over time in windows, stage-2 advance rate,
    stage correlation and the rl against random comparison.

    Raises:
        SearchLogError: a log is truncated or malformed.
    """

    report_title: str
    windows_table: str
    summary_table: str

    def __init__(self, logs: Sequence[Union[str, Path]], window: int = WINDOW):
        self.window = window
        self.runs = []
        for path in logs:
            header, records = SearchLog(path).read(strict=True, complete=True)
            self.runs.append(SearchRun(Path(path), header, records))

        self.windows = [row for run in self.runs for row in window_rows(run, window)]
        self.summary = self.get_summary()

        self.get_report_title()
        self.get_windows_table()
        self.get_summary_table()

    def get_summary(self) -> List[Dict]:
        rows = []
        for run in self.runs:
            rho = stage_correlation(run.records)
            rows.append(
                {
                    "mode": run.mode,
                    "log": run.name,
                    "architectures": len(run.records),
                    "advance_rate": float(np.mean([r.continued for r in run.records])) if run.records else 0.0,
                    "stage2_count": sum(r.reward2 is not None for r in run.records),
                    "spearman_r1_r2": rho,
                    "last_window_mean": last_window_mean(run.records, self.window) if run.records else 0.0,
                    "best_final_reward": max((r.final_reward for r in run.records), default=0.0),
                }
            )
        return rows

    def rl_vs_random(self) -> Optional[float]:
        """Last-window mean of the rl runs minus that of the random runs, None without both modes."""
        means = {}
        for mode in ("rl", "random"):
            values = [row["last_window_mean"] for row in self.summary if row["mode"] == mode]
            if values:
                means[mode] = float(np.mean(values))
        if len(means) < 2:
            return None
        return means["rl"] - means["random"]

    def get_report_title(self) -> None:
        self.report_title = f"\n+- AuxCell search report for {len(self.runs)} log(s) -+"

    def get_windows_table(self) -> None:
        data = [["Mode", "Log", "Window", "Mean final", "Mean stage 1", "Advance rate", "Mean p"]] + [
            [
                row["mode"],
                row["log"],
                f"{row['window_start']}-{row['window_end']}",
                round(row["mean_final_reward"], 4),
                round(row["mean_reward1"], 4),
                round(row["advance_rate"], 3),
                round(row["mean_p"], 3),
            ]
            for row in self.windows
        ]
        self.windows_table = AsciiTable(data).table

    def get_summary_table(self) -> None:
        data = [["Mode", "Log", "Archs", "Stage 2", "Spearman r1/r2", f"Last {self.window}", "Best"]] + [
            [
                row["mode"],
                row["log"],
                row["architectures"],
                row["stage2_count"],
                "n/a" if row["spearman_r1_r2"] is None else round(row["spearman_r1_r2"], 4),
                round(row["last_window_mean"], 4),
                round(row["best_final_reward"], 4),
            ]
            for row in self.summary
        ]
        self.summary_table = AsciiTable(data).table

    def get_full_report(self) -> str:
        difference = self.rl_vs_random()
        comparison = "" if difference is None else f"\nRL minus random, last {self.window} mean final reward: {difference:+.4f}"
        return f"{self.report_title}\n{self.windows_table}\n{self.summary_table}{comparison}"

    def print_report(self) -> None:
        print(self.get_full_report())

    def write_csv(self, out_dir: Union[str, Path]) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for name, rows in (("windows.csv", self.windows), ("summary.csv", self.summary)):
            path = out_dir / name
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.DictWriter(f, fieldnames=list(rows[0]) if rows else [])
                writer.writeheader()
                writer.writerows(rows)
            written.append(path)
        logging.info(f"Wrote report tables to {out_dir}")
        return written

    def plot(self, out_dir: Union[str, Path]) -> List[Path]:
        """Static plots: final reward over time, stage correlation, advance rate per window."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []

        fig, ax = plt.subplots(figsize=(8, 4))
        for run in self.runs:
            records = sorted(run.records, key=lambda r: r.index)
            ax.scatter([r.index for r in records], [r.final_reward for r in records], s=6, alpha=0.4)
            rows = [row for row in self.windows if row["log"] == run.name]
            ax.plot([(row["window_start"] + row["window_end"]) / 2 for row in rows], [row["mean_final_reward"] for row in rows], marker="o", label=f"{run.mode} ({run.name})")
        ax.set_xlabel("architecture")
        ax.set_ylabel("final reward")
        ax.legend()
        written.append(out_dir / "reward_over_time.png")
        fig.savefig(written[-1], dpi=120, bbox_inches="tight")
        plt.close(fig)

        fig, ax = plt.subplots(figsize=(5, 5))
        for run in self.runs:
            pairs = [(r.reward1, r.reward2) for r in run.records if r.reward2 is not None]
            if pairs:
                ax.scatter(*zip(*pairs), s=10, label=run.name)
        ax.set_xlabel("stage 1 reward")
        ax.set_ylabel("stage 2 reward")
        ax.legend()
        written.append(out_dir / "stage_correlation.png")
        fig.savefig(written[-1], dpi=120, bbox_inches="tight")
        plt.close(fig)

        fig, ax = plt.subplots(figsize=(8, 4))
        for run in self.runs:
            rows = [row for row in self.windows if row["log"] == run.name]
            ax.plot([row["window_start"] for row in rows], [row["advance_rate"] for row in rows], marker="s", label=run.name)
        ax.set_xlabel("window start")
        ax.set_ylabel("stage 2 advance rate")
        ax.set_ylim(0, 1.05)
        ax.legend()
        written.append(out_dir / "advance_rate.png")
        fig.savefig(written[-1], dpi=120, bbox_inches="tight")
        plt.close(fig)

        logging.info(f"Wrote {len(written)} plots to {out_dir}")
        return written


if __name__ == "__main__":
    import sys

    from auxcell.utilities import setup_logging

    setup_logging(level="debug")
    SearchReport(sys.argv[1:]).print_report()
