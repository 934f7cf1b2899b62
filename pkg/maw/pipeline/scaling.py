"""Wall time of one workflow against input size, with a linear fit."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import numpy as np
from loguru import logger

from ..errors import UsageError
from ..io.synth import build_corpus_of_size
from ..io.writers import corpus_bytes
from ..models import LocationRecord
from ..schemas import ScalingPoint, ScalingReport, WorkflowSpec
from .engine import execute_workflow


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, Optional[float]]:
    """Least-squares slope, intercept and R². R² is None when either axis has no spread."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if np.ptp(x) == 0:
        return 0.0, float(y.mean()), None
    slope, intercept = np.polyfit(x, y, 1)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0:
        return float(slope), float(intercept), None
    ss_res = float(((y - (slope * x + intercept)) ** 2).sum())
    return float(slope), float(intercept), 1.0 - ss_res / ss_tot


def scaling_probe(
    spec: WorkflowSpec,
    sizes_bytes: Sequence[int],
    base: Mapping[str, Sequence[LocationRecord]],
    workers: Optional[int] = None,
    repeats: int = 1,
    utc_offset_min: Optional[int] = None,
) -> ScalingReport:
    """Run ``spec`` on corpora grown from ``base`` to each size; keep the fastest of ``repeats``."""
    if len(sizes_bytes) < 3:
        raise UsageError(f"scaling needs at least 3 sizes, got {len(sizes_bytes)}")
    if repeats < 1:
        raise UsageError(f"repeats must be positive, got {repeats}")

    points = []
    for size in sorted(sizes_bytes):
        corpus = build_corpus_of_size(base, size)
        actual = corpus_bytes(corpus)
        seconds = min(
            execute_workflow(spec, corpus, workers=workers, utc_offset_min=utc_offset_min,
                             input_bytes=actual).profile.total_seconds
            for _ in range(repeats)
        )
        records = sum(len(v) for v in corpus.values())
        logger.info(f"{spec.name}: {actual} bytes, {records} record(s) in {seconds:.3f}s")
        points.append(ScalingPoint(size_bytes=actual, records=records, seconds=seconds))

    slope, intercept, r2 = linear_fit([p.size_bytes for p in points], [p.seconds for p in points])
    if r2 is None:
        logger.warning(f"{spec.name}: timings have no spread, R² is undefined")
    return ScalingReport(
        workflow=spec.name,
        points=points,
        slope=slope,
        intercept=intercept,
        r2=r2,
        degenerate=r2 is None,
    )
