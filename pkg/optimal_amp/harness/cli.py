"""Command-line entry point: ``amp se|run|sweep|construct|selftest``.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure, 3 selftest failure.
"""

from __future__ import annotations

import logging
import os
import sys
from argparse import ArgumentParser

import platformdirs

from ..config import load_config, resolve_threads
from ..constants import MODE_NAMES
from ..errors import AmpError, ConfigError
from .commands import cmd_construct, cmd_run, cmd_se, cmd_sweep
from .selftest import cmd_selftest

logger = logging.getLogger(__name__)

APP_NAME = "optimal-amp"


class _Parser(ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> ArgumentParser:
    parser = _Parser(prog="amp", description="Optimal M-estimation through approximate message passing")
    parser.add_argument("mode", choices=list(MODE_NAMES), help="Experiment to run")
    parser.add_argument("--config", default=None, help="YAML or JSON experiment configuration")
    parser.add_argument(
        "--out",
        default=None,
        help="Output directory (default: the configuration's 'out', else <user cache dir>/<mode>)",
    )
    parser.add_argument("--threads", type=int, default=None, help="Worker threads for sweeps")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    return parser


def _dispatch(mode: str, cfg, out: str, threads: int) -> dict[str, str]:
    if mode == MODE_NAMES.SE:
        return cmd_se(cfg, out)
    if mode == MODE_NAMES.RUN:
        return cmd_run(cfg, out)
    if mode == MODE_NAMES.SWEEP:
        return cmd_sweep(cfg, out, threads)
    if mode == MODE_NAMES.CONSTRUCT:
        return cmd_construct(cfg, out)
    return cmd_selftest(cfg, out)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(f"amp: {e}", file=sys.stderr)
        return e.exit_code

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config, mode=args.mode)
        threads = resolve_threads(args.threads)
        out = args.out or cfg.out or os.path.join(platformdirs.user_cache_dir(APP_NAME), args.mode)
        logger.info(f"Starting '{args.mode}' with {threads} thread(s), output in {out}")
        paths = _dispatch(args.mode, cfg, out, threads)
    except AmpError as e:
        logger.error(str(e))
        return e.exit_code
    for name, path in sorted(paths.items()):
        logger.info(f"Wrote {name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
