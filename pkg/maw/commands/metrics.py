import argparse
import json

from ..dependencies import add_settings_arguments, metrics_or_none, settings_for
from ..io.ingest import read_labeled_records, read_stays
from ..io.writers import metrics_payload, write_metrics
from ..pipeline.stages import stay_sources
from ..stages.stay_detection import collect_stays


def register(subparsers):
    parser = subparsers.add_parser("metrics", help="mobility metrics from a stays or labeled-records CSV")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--stays", help="stays CSV written by 'maw run'")
    source.add_argument("--labeled", help="labeled records CSV written by 'maw run'")
    add_settings_arguments(parser)
    parser.add_argument("--out", "-o", help="directory for metrics.json and histogram.csv")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    settings = settings_for(args)
    if args.stays:
        stays = read_stays(args.stays)
    else:
        labeled = read_labeled_records(args.labeled)
        stays = {
            device: collect_stays(items, stay_sources(items, settings.accuracy_split_m))
            for device, items in labeled.items()
        }
    metrics = metrics_or_none(stays, settings.utc_offset_min)
    if args.out:
        write_metrics(args.out, metrics)
    print(json.dumps(metrics_payload(metrics), indent=2, sort_keys=True))
    return 0
