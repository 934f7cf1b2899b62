# maw/dependencies.py
"""Helpers shared by the sub-commands: common flags, settings overrides and loading."""

import argparse
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from .config import Settings, get_settings
from .errors import EmptyCohort, UsageError
from .io.ingest import Corpus, load_corpus
from .metrics import aggregate_metrics
from .pipeline.parser import load_workflow
from .schemas import IngestConfig, MobilityMetrics, WorkflowSpec

_UNITS = {"B": 1, "KB": 10**3, "MB": 10**6, "GB": 10**9}


def add_input_arguments(parser: argparse.ArgumentParser, required: bool = True):
    parser.add_argument("--input", "-i", nargs="+", type=Path, required=required, metavar="CSV",
                        help="records CSV file(s): device_id,timestamp,lat,lon,accuracy_m")
    parser.add_argument("--iso-timestamps", action="store_true", help="timestamps are ISO-8601 UTC")
    parser.add_argument("--require-sorted", action="store_true",
                        help="reject input not already in time order instead of sorting it")
    add_settings_arguments(parser)


def add_settings_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--utc-offset-min", type=int, help="fixed local-time offset (env MAW_UTC_OFFSET_MIN)")
    parser.add_argument("--accuracy-split-m", type=float, help="GPS/cellular split (env MAW_ACCURACY_SPLIT_M)")
    parser.add_argument("--workers", "-j", type=int, help="parallel user partitions (env MAW_WORKERS)")


def add_change_point_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--distance-km", type=float, help="distance threshold forced on every stage")
    parser.add_argument("--duration-min", type=float, help="duration threshold forced on every stage")
    parser.add_argument("--osc-window-min", type=float, help="oscillation time window forced on every stage")
    parser.add_argument("--override", action="store_true", help="allow change points outside documented ranges")


def settings_for(args: argparse.Namespace) -> Settings:
    """Environment settings with any CLI flag that was given taking precedence."""
    updates = {
        name: getattr(args, name)
        for name in ("utc_offset_min", "accuracy_split_m", "workers")
        if getattr(args, name, None) is not None
    }
    base = get_settings()
    try:
        return Settings(**{**base.model_dump(), **updates})
    except ValidationError as exc:
        raise UsageError(validation_message(exc))


def ingest_config(args: argparse.Namespace, settings: Settings) -> IngestConfig:
    return IngestConfig(
        paths=list(args.input or []),
        accuracy_split_m=settings.accuracy_split_m,
        utc_offset_min=settings.utc_offset_min,
        sort_policy="require" if getattr(args, "require_sorted", False) else "sort",
        iso_timestamps=getattr(args, "iso_timestamps", False),
    )


def input_bytes(paths: Sequence[Path]) -> int:
    return sum(path.stat().st_size for path in paths if path.is_file())


def load_input(args: argparse.Namespace, settings: Settings) -> tuple[Corpus, int]:
    cfg = ingest_config(args, settings)
    corpus = load_corpus(cfg.paths, cfg)
    return corpus, input_bytes(cfg.paths)


def validation_message(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error.get("loc", ()))
    return f"{where}: {error['msg']}" if where else error["msg"]


def workflow_for(reference: str, args: argparse.Namespace) -> WorkflowSpec:
    """Load a workflow and apply the change-point flags to every stage."""
    spec = load_workflow(reference)
    updates = {
        "distance_km_threshold": getattr(args, "distance_km", None),
        "duration_min_threshold": getattr(args, "duration_min", None),
        "osc_window_min": getattr(args, "osc_window_min", None),
        "override": True if getattr(args, "override", False) else None,
    }
    if all(value is None for value in updates.values()):
        return spec
    try:
        return spec.with_change_points(**updates)
    except ValidationError as exc:
        raise UsageError(validation_message(exc))


def parse_number_list(text: str) -> list[float]:
    """Comma separated numbers; fractions such as ``1/6`` are allowed."""
    try:
        return [float(Fraction(part.strip())) for part in text.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"cannot parse number list '{text}'")


def parse_sizes(text: str, unit_bytes: Optional[int] = None) -> list[int]:
    """Sizes as multiples of a base (``1x,2x,4x``) or absolute (``10MB,20MB``)."""
    sizes = []
    for part in (p.strip().upper() for p in text.split(",") if p.strip()):
        try:
            if part.endswith("X"):
                if not unit_bytes:
                    raise UsageError(f"size '{part}' is relative but there is no base corpus size")
                sizes.append(int(float(part[:-1]) * unit_bytes))
                continue
            unit = next((u for u in ("GB", "MB", "KB", "B") if part.endswith(u)), None)
            number = part[: -len(unit)] if unit else part
            sizes.append(int(float(number) * _UNITS[unit or "B"]))
        except ValueError:
            raise UsageError(f"cannot parse size '{part}'")
    if any(size <= 0 for size in sizes):
        raise UsageError(f"sizes must be positive, got '{text}'")
    return sizes


def metrics_or_none(stays, utc_offset_min: int) -> Optional[MobilityMetrics]:
    try:
        return aggregate_metrics(stays, utc_offset_min=utc_offset_min)
    except EmptyCohort as exc:
        logger.warning(f"no metrics: {exc.detail}")
        return None
