import argparse
import logging
import sys
from typing import Optional, Sequence

from app import __version__
from app.commands import COMMANDS
from app.core.config import get_settings
from app.core.errors import SignalLabError
from app.core.logging import configure_logging

logger = logging.getLogger("cli")


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signal-lab",
        description="Deep Q-learning traffic signal control on a simulated four-way intersection.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for command in COMMANDS:
        command.register(sub)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    try:
        configure_logging(get_settings().log_level)
        return args.handler(args)
    except SignalLabError as exc:
        print(f"[{args.command}] error: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # noqa: BLE001
        logger.exception("unexpected failure")
        print(f"[{args.command}] error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
