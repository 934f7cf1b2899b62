import argparse

from ..dependencies import add_change_point_arguments, workflow_for
from ..pipeline.validation import validate_workflow


def register(subparsers):
    parser = subparsers.add_parser("validate", help="check a workflow's stage order without running it")
    parser.add_argument("--workflow", "-w", required=True, help="preset:<name> or a workflow JSON file")
    add_change_point_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    spec = workflow_for(args.workflow, args)
    report = validate_workflow(spec)
    for d in report.diagnostics:
        where = f"stage {d.stage_index}" if d.stage_index is not None else "workflow"
        print(f"{d.severity.upper()} {d.code} {where}: {d.message}")
    labels = " -> ".join(stage.label for stage in spec.stages)
    print(f"{spec.name} [{spec.input}]: {labels or '(no stages)'}: {'ok' if report.ok else 'rejected'}")
    return 0 if report.ok else 2
