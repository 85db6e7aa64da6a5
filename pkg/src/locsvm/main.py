import argparse
import sys
from pathlib import Path

from pydantic import ValidationError

from locsvm.console.commands import COMMANDS, run_command
from locsvm.console.config import load_config
from locsvm.printer import print_error


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locsvm", description="Localized SVM toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        sub = subparsers.add_parser(name, help=command.help, description=command.help)
        sub.add_argument("--config", type=Path, default=None, help="key=value configuration file")
        for key, field in command.config.model_fields.items():
            # values stay strings here; the config model parses and validates them
            sub.add_argument(
                f"--{key}",
                dest=key,
                default=argparse.SUPPRESS,
                metavar="VALUE",
                help=f"{field.description or key} (default: {field.default})",
            )
    return parser


def describe(error: Exception) -> str:
    if isinstance(error, ValidationError):
        first = error.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or error.title
        return f"{location}: {first['msg']}"
    return str(error) or type(error).__name__


def run(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    name = args.pop("command")
    config_file = args.pop("config")
    try:
        cfg = load_config(COMMANDS[name].config, config_file, args)
        run_command(name, cfg)
    except (ValueError, OSError) as e:
        print_error(describe(e))
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
