"""``noisegeo`` command line: run one experiment from a JSON config.

Exit codes: 0 success, 2 configuration error, 3 numerical-check failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, NumericalCheckError, parse_config_text, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noisegeo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file (defaults are used when omitted)")
        p.add_argument("--out", type=Path, default=Path("out") / name, help="output directory")
        p.add_argument("--seed", type=int, help="master seed; overrides the config")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on this)")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = None
        if args.config is not None:
            try:
                text = args.config.read_text()
            except OSError as e:
                raise ConfigError(f"cannot read config: {e}") from None
            cfg = parse_config_text(text, str(args.config))
        result = run_experiment(args.experiment, cfg, args.out, args.seed, args.threads)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalCheckError as e:
        print(f"numerical check failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    for name, (ok, detail) in result.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    for f in result.files:
        print(f"wrote {f}")
    return EXIT_OK if result.passed else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
