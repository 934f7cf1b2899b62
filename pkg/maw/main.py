# maw/main.py
import argparse
import sys
from typing import Optional, Sequence

from loguru import logger

from . import __version__
from .commands import COMMANDS
from .config import configure_logging
from .errors import MawError, RUNTIME_EXIT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maw", description="Stay detection workflows for GPS and cellular data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)
    try:
        return args.handler(args)
    except MawError as exc:
        logger.error(exc.detail)
        return exc.exit_code
    except Exception:
        logger.exception(f"'{args.command}' failed")
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
