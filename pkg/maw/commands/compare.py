import argparse

from ..dependencies import (
    add_change_point_arguments,
    add_input_arguments,
    load_input,
    parse_number_list,
    settings_for,
    workflow_for,
)
from ..errors import UsageError
from ..io.writers import prepare_dir, write_json
from ..pipeline.compare import (
    SWEEP_DISTANCES_KM,
    SWEEP_DURATIONS_MIN,
    compare_workflows,
    expand_osc_windows,
    sweep_change_points,
)
from ..schemas import ComparisonReport


def register(subparsers):
    parser = subparsers.add_parser("compare", help="run several workflows on one cohort and compare metrics")
    parser.add_argument("--workflows", "-w", nargs="+", required=True, metavar="WORKFLOW",
                        help="preset:<name> references or workflow JSON files")
    parser.add_argument("--osc-windows", help="expand oscillation-correcting workflows over these windows, e.g. 1/6,5,11")
    parser.add_argument("--sweep", action="store_true", help="sweep one workflow over the distance x duration grid")
    parser.add_argument("--distances", help="sweep distances in km (default 0.05,0.2,0.5)")
    parser.add_argument("--durations", help="sweep durations in minutes (default 0.5,5,30)")
    add_input_arguments(parser)
    add_change_point_arguments(parser)
    parser.add_argument("--out", "-o", help="directory for comparison.json")
    parser.set_defaults(handler=handle)


def format_report(report: ComparisonReport) -> str:
    lines = [
        f"cohort: {report.cohort_size} user(s)",
        f"{'workflow':<32} {'trips/day':>10} {'rg_km':>8} {'stays':>7} {'days':>6} {'seconds':>8}",
    ]
    for row in report.rows:
        m = row.metrics
        lines.append(
            f"{row.name:<32} {m.trips_per_person_day:>10.3f} {m.rg_km_per_person_day:>8.3f} "
            f"{row.stays:>7d} {m.person_days:>6d} {row.profile.total_seconds:>8.2f}"
        )
    return "\n".join(lines)


def handle(args: argparse.Namespace) -> int:
    settings = settings_for(args)
    specs = [workflow_for(reference, args) for reference in args.workflows]
    corpus, _ = load_input(args, settings)

    if args.sweep:
        if len(specs) != 1:
            raise UsageError(f"--sweep takes exactly one workflow, got {len(specs)}")
        distances = parse_number_list(args.distances) if args.distances else SWEEP_DISTANCES_KM
        durations = parse_number_list(args.durations) if args.durations else SWEEP_DURATIONS_MIN
        report, _ = sweep_change_points(
            specs[0], corpus, distances, durations, workers=settings.workers, utc_offset_min=settings.utc_offset_min
        )
    else:
        if args.osc_windows:
            specs = expand_osc_windows(specs, parse_number_list(args.osc_windows))
        report, _ = compare_workflows(
            specs,
            corpus,
            workers=settings.workers,
            utc_offset_min=settings.utc_offset_min,
            accuracy_split_m=settings.accuracy_split_m,
        )

    if args.out:
        write_json(report.model_dump(), prepare_dir(args.out) / "comparison.json")
    print(format_report(report))
    return 0
