import argparse

from pydantic import ValidationError

from ..dependencies import validation_message
from ..errors import UsageError
from ..io.synth import generate_synthetic, write_synthetic
from ..schemas import SynthConfig


def register(subparsers):
    parser = subparsers.add_parser("synth", help="generate a seeded synthetic corpus with ground-truth stays")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--users", type=int, default=10)
    parser.add_argument("--days", type=int, default=3)
    parser.add_argument("--gps-fraction", type=float, default=0.5, help="share of observations that are GPS")
    parser.add_argument("--gps-noise-m", type=float, default=5.0)
    parser.add_argument("--cellular-noise-m", type=float, default=150.0)
    parser.add_argument("--oscillation-rate", type=float, default=0.0, help="ping-pong events per cellular stay record")
    parser.add_argument("--tower-distance-km", type=float, default=2.0)
    parser.add_argument("--interval-s", type=int, default=60, help="sampling interval")
    parser.add_argument("--utc-offset-min", type=int, default=0)
    parser.add_argument("--out", "-o", required=True, help="directory for records.csv and truth.csv")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    try:
        cfg = SynthConfig(
            seed=args.seed,
            n_users=args.users,
            days=args.days,
            gps_fraction=args.gps_fraction,
            gps_noise_m=args.gps_noise_m,
            cellular_noise_m=args.cellular_noise_m,
            oscillation_rate=args.oscillation_rate,
            tower_pair_distance_km=args.tower_distance_km,
            sample_interval_s=args.interval_s,
            utc_offset_min=args.utc_offset_min,
        )
    except ValidationError as exc:
        raise UsageError(validation_message(exc))
    written = write_synthetic(generate_synthetic(cfg), args.out)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0
