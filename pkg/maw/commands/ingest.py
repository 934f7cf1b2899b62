import argparse

from loguru import logger

from ..dependencies import add_input_arguments, ingest_config, settings_for
from ..io.ingest import load_corpus, split_by_accuracy
from ..io.writers import write_split


def register(subparsers):
    parser = subparsers.add_parser("ingest", help="validate records and split them into GPS and cellular streams")
    add_input_arguments(parser)
    parser.add_argument("--out", "-o", required=True, help="directory for gps.csv and cellular.csv")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    cfg = ingest_config(args, settings_for(args))
    corpus = load_corpus(cfg.paths, cfg)
    gps, cellular = split_by_accuracy((r for device in corpus for r in corpus[device]), cfg)
    written = write_split(gps, cellular, args.out)
    logger.info(f"split at {cfg.accuracy_split_m:g} m: {len(gps)} GPS, {len(cellular)} cellular record(s)")
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0
