import argparse

from loguru import logger

from ..dependencies import (
    add_change_point_arguments,
    add_input_arguments,
    load_input,
    metrics_or_none,
    settings_for,
    workflow_for,
)
from ..io.writers import write_outputs
from ..pipeline.engine import execute_workflow


def register(subparsers):
    parser = subparsers.add_parser("run", help="run one workflow and write labeled records, stays and metrics")
    parser.add_argument("--workflow", "-w", required=True, help="preset:<name> or a workflow JSON file")
    add_input_arguments(parser)
    add_change_point_arguments(parser)
    parser.add_argument("--out", "-o", required=True, help="output directory")
    parser.add_argument("--no-profile", action="store_true", help="skip profile.json")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    settings = settings_for(args)
    spec = workflow_for(args.workflow, args)
    corpus, size = load_input(args, settings)
    result = execute_workflow(
        spec,
        corpus,
        workers=settings.workers,
        utc_offset_min=settings.utc_offset_min,
        accuracy_split_m=settings.accuracy_split_m,
        input_bytes=size,
    )
    metrics = metrics_or_none(result.stays, settings.utc_offset_min)
    written = write_outputs(
        args.out,
        result.labeled,
        result.stays,
        metrics,
        None if args.no_profile else result.profile,
    )
    logger.info(f"{spec.name}: {result.stay_count} stay(s) for {len(result.stays)} user(s), "
                f"peak RSS {result.profile.peak_rss_mb:.0f} MB")
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0
