"""Workflow execution.

Stages run one after another; each stage runs over every user partition (joblib,
input order preserved) before the next one starts. Per-stage wall time, completion
offsets and a resident-memory series go into the run profile.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from time import perf_counter
from typing import Mapping, Optional, Sequence

import psutil
from joblib import Parallel, delayed
from loguru import logger
from tqdm import tqdm

from ..config import get_settings
from ..errors import StageError
from ..models import LabeledRecord, LocationRecord, Stay
from ..schemas import MemorySample, RunProfile, StageSpec, StageTiming, WorkflowSpec
from .stages import StageContext, UserState, apply_stage, check_state, tag_failure
from .validation import ensure_valid, resolve_targets

Corpus = Mapping[str, Sequence[LocationRecord]]


@dataclass
class WorkflowResult:
    workflow: str
    labeled: dict[str, list[LabeledRecord]]
    stays: dict[str, list[Stay]]
    profile: RunProfile

    @property
    def stay_count(self) -> int:
        return sum(len(stays) for stays in self.stays.values())


class MemorySampler:
    """Background RSS sampler (this process plus worker children), in MB."""

    def __init__(self, hz: float = 1.0):
        self.interval = 1.0 / hz
        self.samples: list[MemorySample] = []
        self._process = psutil.Process()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="maw-memory", daemon=True)
        self._started = 0.0

    def _rss_mb(self) -> float:
        total = self._process.memory_info().rss
        for child in self._process.children(recursive=True):
            try:
                total += child.memory_info().rss
            except psutil.Error:
                pass
        return total / 2**20

    def _sample(self):
        self.samples.append(MemorySample(elapsed_s=perf_counter() - self._started, rss_mb=self._rss_mb()))

    def _run(self):
        while not self._stop.wait(self.interval):
            self._sample()

    def __enter__(self) -> MemorySampler:
        self._started = perf_counter()
        self._sample()
        self._thread.start()
        return self

    def __exit__(self, *exc_info):
        self._stop.set()
        self._thread.join()
        self._sample()


def select_stream(records: Sequence[LocationRecord], stream: str, accuracy_split_m: float) -> list[LocationRecord]:
    if stream == "gps":
        return [r for r in records if r.accuracy < accuracy_split_m]
    if stream == "cellular":
        return [r for r in records if r.accuracy >= accuracy_split_m]
    return list(records)


def _run_one(
    stage: StageSpec,
    target: Optional[str],
    index: int,
    state: UserState,
    ctx: StageContext,
    debug_checks: bool,
) -> UserState:
    try:
        out = apply_stage(stage, target, state, ctx)
        if debug_checks:
            check_state(out)
        return out
    except StageError:
        raise
    except Exception as exc:
        raise tag_failure(exc, state, index, stage) from exc


def execute_workflow(
    spec: WorkflowSpec,
    corpus: Corpus,
    workers: Optional[int] = None,
    utc_offset_min: Optional[int] = None,
    accuracy_split_m: Optional[float] = None,
    input_bytes: int = 0,
    progress: Optional[bool] = None,
    debug_checks: Optional[bool] = None,
) -> WorkflowResult:
    """Run a validated workflow over user-partitioned records.

    Output maps are ordered by device_id; labeled records and stays by time.
    Results do not depend on the worker count.
    """
    settings = get_settings()
    workers = workers or settings.workers
    ctx = StageContext(
        utc_offset_min=settings.utc_offset_min if utc_offset_min is None else utc_offset_min,
        accuracy_split_m=accuracy_split_m or settings.accuracy_split_m,
    )
    progress = settings.progress if progress is None else progress
    debug_checks = settings.debug_checks if debug_checks is None else debug_checks

    ensure_valid(spec)
    states = [
        UserState(device, select_stream(records, spec.input, ctx.accuracy_split_m))
        for device, records in sorted(corpus.items())
    ]
    timings: list[StageTiming] = []
    logger.info(f"{spec.name}: {len(states)} user(s), {len(spec.stages)} stage(s), {workers} worker(s)")

    started = perf_counter()
    with MemorySampler(settings.memory_sample_hz) as sampler, Parallel(n_jobs=workers) as parallel:
        for index, (stage, target) in enumerate(zip(spec.stages, resolve_targets(spec.stages))):
            stage_started = perf_counter()
            bar = tqdm(states, desc=f"{index}:{stage.label}", disable=not progress, leave=False)
            states = list(parallel(delayed(_run_one)(stage, target, index, s, ctx, debug_checks) for s in bar))
            seconds = perf_counter() - stage_started
            timings.append(StageTiming(
                index=index,
                label=stage.label,
                seconds=seconds,
                completed_at_s=perf_counter() - started,
            ))
            logger.info(f"{spec.name}: stage {index} {stage.label} finished in {seconds:.2f}s")
    total = perf_counter() - started

    labeled = {state.device_id: state.labeled_or_transient for state in states}
    stays = {state.device_id: state.stays or [] for state in states}
    profile = RunProfile(
        workflow=spec.name,
        workers=workers,
        stages=timings,
        total_seconds=total,
        memory_samples=sampler.samples,
        input_bytes=input_bytes,
        output_rows={
            "labeled": sum(len(v) for v in labeled.values()),
            "stays": sum(len(v) for v in stays.values()),
        },
    )
    logger.info(f"{spec.name}: {profile.output_rows['stays']} stay(s) in {total:.2f}s")
    return WorkflowResult(spec.name, labeled, stays, profile)
