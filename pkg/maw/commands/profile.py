import argparse

from ..dependencies import add_input_arguments, load_input, parse_sizes, settings_for, workflow_for
from ..io.synth import generate_synthetic
from ..io.writers import corpus_bytes, prepare_dir, write_json
from ..pipeline.scaling import scaling_probe
from ..schemas import SynthConfig


def register(subparsers):
    parser = subparsers.add_parser("profile", help="time a workflow on growing corpora and fit a line")
    parser.add_argument("--workflow", "-w", default="preset:integrated", help="preset:<name> or a workflow JSON file")
    parser.add_argument("--sizes", default="1x,2x,4x",
                        help="corpus sizes as multiples of the base (1x,2x,4x) or absolute (10MB,20MB,40MB)")
    parser.add_argument("--repeats", type=int, default=1, help="keep the fastest of this many runs per size")
    parser.add_argument("--synth-users", type=int, default=20, help="base corpus size when no --input is given")
    parser.add_argument("--seed", type=int, default=0)
    add_input_arguments(parser, required=False)
    parser.add_argument("--out", "-o", help="directory for scaling.json")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    settings = settings_for(args)
    spec = workflow_for(args.workflow, args)
    if args.input:
        base, _ = load_input(args, settings)
    else:
        base = generate_synthetic(SynthConfig(seed=args.seed, n_users=args.synth_users)).records
    sizes = parse_sizes(args.sizes, corpus_bytes(base))

    report = scaling_probe(spec, sizes, base, workers=settings.workers, repeats=args.repeats,
                           utc_offset_min=settings.utc_offset_min)
    if args.out:
        write_json(report.model_dump(), prepare_dir(args.out) / "scaling.json")
    for point in report.points:
        print(f"{point.size_bytes:>12d} B {point.records:>10d} records {point.seconds:>9.3f} s")
    r2 = "undefined" if report.r2 is None else f"{report.r2:.4f}"
    print(f"slope {report.slope:.3e} s/B, intercept {report.intercept:.3f} s, R² {r2}")
    return 0
