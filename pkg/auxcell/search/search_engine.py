# -*- coding: utf-8 -*-
"""
    This is part of AuxCell (C) 2024
"""

import logging
from collections import deque
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from auxcell.ac_types import (
    AuxCellException,
    AuxCellSettingsModel,
    ConfigError,
    SearchHeaderModel,
    SearchLogError,
    SearchRecordModel,
)
from auxcell.controller import Controller, Rollout, genome_to_tokens
from auxcell.genome import Genome, decode, encode, sample_uniform
from auxcell.nn import checkpoint_exists
from auxcell.search.gate import RunningMean, p_at, should_continue
from auxcell.search.progressive import StageResult, evaluate_stage1, evaluate_stage2, flags_from_settings
from auxcell.search.search_log import SearchLog, controller_path, top_k
from auxcell.tasks import TaskArtifacts
from auxcell.utilities import child_rng

# Streams of child_rng(seed, index, stream) used for one architecture
SAMPLE_STREAM = 0
GATE_STREAM = 1
STAGE1_STREAM = 2
STAGE2_STREAM = 3


@dataclass
class SearchResult:
    records: List[SearchRecordModel]
    top_k: List[Tuple[str, float]]
    controller: Optional[Controller] = None


@dataclass
class _Job:
    index: int
    genome: Genome
    rollout: Optional[Rollout] = None
    stage1: Optional[StageResult] = None
    p: float = 1.0
    running_mean: float = 0.0
    continued: bool = False


@dataclass
class SearchEngine:
    """
    The outer loop. Worker threads train sampled architectures; this coordinator alone samples,
    gates, appends to the log and updates the controller.

    Every random draw of architecture i comes from child_rng(seed, i, stream) and rows are recorded in
    index order, so any worker count, and a resumed run, make the same decisions as one uninterrupted worker.
    """

    settings: AuxCellSettingsModel
    artifacts: TaskArtifacts
    log_path: Optional[Union[str, Path]] = None
    controller_file: Optional[Union[str, Path]] = None
    records: List[SearchRecordModel] = field(default_factory=list)
    controller: Optional[Controller] = None

    def __post_init__(self):
        self.log = SearchLog(self.log_path) if self.log_path is not None else None
        self.checkpoint = controller_path(self.log_path, self.controller_file) if self.log_path is not None else None
        self.batch: List[Rollout] = []
        self.running = RunningMean()

    @property
    def mode(self):
        return self.settings.search.mode

    @property
    def seed(self) -> int:
        return self.settings.search.seed

    # Start and resume

    def _start(self) -> None:
        if self.mode == "rl":
            self.controller = Controller(self.settings.controller)
        if self.log is not None:
            header = SearchHeaderModel(mode=self.mode, seed=self.seed, settings=self.settings.model_dump(mode="json"))
            self.log.write_header(header)
        logging.info(f"Starting a {self.mode} search over {self.settings.search.total_architectures} architectures")

    def _resume(self) -> None:
        """
        Reads the log and the controller checkpoint back. The run continues with the settings
        recorded in the log header, only the worker count may change.
        """
        if self.log is None or not self.log.exists():
            raise SearchLogError(f"{self.log_path}: nothing to resume")
        header, records = self.log.read(strict=False)
        if header.mode != self.mode or header.seed != self.seed:
            raise ConfigError(
                f"{self.log_path}: the log holds a {header.mode} search with seed {header.seed}, "
                f"not a {self.mode} search with seed {self.seed}"
            )
        if [r.index for r in records] != list(range(len(records))):
            raise SearchLogError(f"{self.log_path}: architecture rows are not recorded in index order")
        workers = self.settings.search.workers
        self.settings = AuxCellSettingsModel(**header.settings)
        self.settings.search.workers = workers
        self.log.rewrite(header, records)
        self.records = list(records)
        self.running = RunningMean.replay(records)

        if self.mode == "rl":
            if checkpoint_exists(self.checkpoint):
                self.controller, _ = Controller.load(self.checkpoint)
            elif not records:
                self.controller = Controller(self.settings.controller)
            else:
                raise SearchLogError(f"{self.checkpoint}: controller checkpoint missing for a resumed rl search")

            batch_size = self.controller.settings.batch_size
            consumed = self.controller.updates * batch_size
            if consumed > len(records):
                raise SearchLogError(f"{self.checkpoint}: controller is ahead of the log")
            self.batch = [self._rollout_from_record(r) for r in records[consumed:]]
            while len(self.batch) >= batch_size:
                self._update_controller()

        logging.info(f"Resuming the {self.mode} search after {len(records)} architectures")

    @staticmethod
    def _rollout_from_record(record: SearchRecordModel) -> Rollout:
        if record.token_logprobs is None:
            raise SearchLogError(f"architecture {record.index} has no token log probabilities")
        genome = decode(record.genome)
        return Rollout(
            genome,
            tuple(genome_to_tokens(genome)),
            tuple(record.token_logprobs),
            record.final_reward,
            2 if record.continued else 1,
        )

    # Per architecture steps

    def _sample(self, index: int) -> _Job:
        rng = child_rng(self.seed, index, SAMPLE_STREAM)
        if self.controller is not None:
            rollout = self.controller.sample(rng)
            return _Job(index, rollout.genome, rollout)
        return _Job(index, sample_uniform(rng))

    def _gate(self, job: _Job, result: StageResult) -> None:
        job.stage1 = result
        job.p = p_at(job.index, self.settings.search)
        job.running_mean = self.running.mean
        job.continued = not result.failed and should_continue(
            result.reward, self.running, job.p, child_rng(self.seed, job.index, GATE_STREAM)
        )
        self.running.update(result.reward)

    def _finish(self, job: _Job, stage2: Optional[StageResult]) -> SearchRecordModel:
        stage1 = job.stage1
        final = stage2.reward if stage2 is not None else stage1.reward
        record = SearchRecordModel(
            index=job.index,
            genome=encode(job.genome),
            reward1=stage1.reward,
            continued=job.continued,
            reward2=stage2.reward if stage2 is not None else None,
            final_reward=final,
            p_at_decision=job.p,
            seconds_stage1=stage1.seconds,
            seconds_stage2=stage2.seconds if stage2 is not None else 0.0,
            mode=self.mode,
            ablation=flags_from_settings(self.settings.search),
            failed=stage1.failed or (stage2 is not None and stage2.failed),
            token_logprobs=list(job.rollout.token_logprobs) if job.rollout is not None else None,
            running_mean=job.running_mean,
            metrics1=stage1.metrics,
            metrics2=stage2.metrics if stage2 is not None else None,
        )
        stage1.net = None

        self.records.append(record)
        if self.log is not None:
            self.log.append(record)
        logging.info(
            f"Architecture {job.index}: reward1={record.reward1:.4f} continued={record.continued} "
            f"reward2={'-' if record.reward2 is None else f'{record.reward2:.4f}'} final={final:.4f} "
            f"p={job.p:.3f} mean={job.running_mean:.4f} {job.genome}"
        )

        if job.rollout is not None and self.controller is not None:
            job.rollout.reward = final
            job.rollout.stage_reached = 2 if stage2 is not None else 1
            self.batch.append(job.rollout)
            if len(self.batch) >= self.controller.settings.batch_size:
                self._update_controller()
            if self.checkpoint is not None:
                self.controller.save(self.checkpoint)
        return record

    def _update_controller(self) -> None:
        size = self.controller.settings.batch_size
        batch, self.batch = self.batch[:size], self.batch[size:]
        self.controller.ppo_update(batch)

    # Loop

    def _can_sample(self, index: int) -> bool:
        """Rollouts of controller batch k are sampled after exactly k updates, whatever the worker count."""
        if self.controller is None:
            return True
        return self.controller.updates >= index // self.controller.settings.batch_size

    def run(self, resume: bool = False) -> SearchResult:
        """
        Samples, trains, gates and records architectures until the configured total is in the log.

        Workers only train. Gating, logging and controller updates happen strictly in index order,
        so the log, the running means and the PPO batches do not depend on the worker count.
        """
        if resume:
            self._resume()
        else:
            self._start()

        done = {r.index for r in self.records}
        order = [i for i in range(self.settings.search.total_architectures) if i not in done]
        todo = deque(order)
        workers = self.settings.search.workers
        flags = flags_from_settings(self.settings.search)
        in_flight: Dict[Future, Tuple[str, _Job]] = {}
        trained: Dict[int, Tuple[_Job, StageResult]] = {}
        finished: Dict[int, Tuple[_Job, Optional[StageResult]]] = {}
        next_gate = next_finish = 0

        with ThreadPoolExecutor(max_workers=workers) as pool:

            def launch() -> None:
                while todo and len(in_flight) < workers and self._can_sample(todo[0]):
                    job = self._sample(todo.popleft())
                    rng = child_rng(self.seed, job.index, STAGE1_STREAM)
                    future = pool.submit(evaluate_stage1, job.genome, self.artifacts, self.settings, rng, flags)
                    in_flight[future] = ("stage1", job)

            def advance() -> None:
                nonlocal next_gate, next_finish
                while next_gate < len(order) and order[next_gate] in trained:
                    job, result = trained.pop(order[next_gate])
                    next_gate += 1
                    self._gate(job, result)
                    if job.continued:
                        rng = child_rng(self.seed, job.index, STAGE2_STREAM)
                        future = pool.submit(evaluate_stage2, job.genome, result, self.artifacts, self.settings, rng, flags)
                        in_flight[future] = ("stage2", job)
                    else:
                        finished[job.index] = (job, None)
                while next_finish < len(order) and order[next_finish] in finished:
                    job, stage2 = finished.pop(order[next_finish])
                    next_finish += 1
                    self._finish(job, stage2)

            launch()
            while in_flight:
                ready, _ = wait(list(in_flight), return_when=FIRST_COMPLETED)
                for future in ready:
                    stage, job = in_flight.pop(future)
                    if stage == "stage1":
                        trained[job.index] = (job, future.result())
                    else:
                        finished[job.index] = (job, future.result())
                advance()
                launch()

        if todo or next_finish < len(order):
            raise AuxCellException(f"search stopped with {len(order) - next_finish} architectures unrecorded")

        best = top_k(self.records, self.settings.search.top_k)
        logging.info(f"Search finished, best final reward {best[0][1]:.4f}" if best else "Search finished without a scored architecture")
        return SearchResult(self.records, best, self.controller)


def run_search(
    settings: AuxCellSettingsModel,
    artifacts: TaskArtifacts,
    log_path: Optional[Union[str, Path]] = None,
    resume: bool = False,
    controller_file: Optional[Union[str, Path]] = None,
) -> SearchResult:
    """
    Runs an rl or random search and returns every log row with the top-k canonical genomes.

    Args:
        settings: the run settings; settings.search.mode selects rl or random.
        artifacts: task artifacts from prepare_task.
        log_path: JSONL log to write, or to continue with resume=True.
        resume: continue an interrupted run from its log and controller checkpoint.
        controller_file: controller checkpoint, next to the log by default.
    """
    engine = SearchEngine(settings.model_copy(deep=True), artifacts, log_path, controller_file)
    return engine.run(resume)
