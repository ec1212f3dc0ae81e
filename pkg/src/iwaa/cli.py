"""Command line entry point.

    iwaa run --config config.json [--stage NAME] [--seed N] [--workers N] [--out DIR]
    iwaa fixture DIR

Exit codes: 0 success, 2 configuration error, 3 input error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .core import ConfigError, InputError
from .pipeline import PIPELINE_STAGES, STAGES, RunConfig, StageError, run_pipeline, write_bundled_fixture

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_STAGE = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iwaa", description="In-wall ambient awareness pipeline")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run pipeline stages")
    run.add_argument("--config", required=True, help="JSON run configuration")
    run.add_argument("--stage", default="all", choices=STAGES + ("all",))
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out", help="output directory (overrides the config)")

    fx = sub.add_parser("fixture", help="write the bundled synthetic dataset and a config")
    fx.add_argument("directory")
    fx.add_argument("--seed", type=int, default=7)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.cmd == "fixture":
        path = write_bundled_fixture(args.directory, seed=args.seed)
        print(path)
        return EXIT_OK

    try:
        cfg = RunConfig.from_file(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out = args.out
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    stages = PIPELINE_STAGES + ("sweep", "report") if args.stage == "all" else (args.stage,)
    try:
        manifest = run_pipeline(cfg, stages)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc.cause, InputError) else EXIT_STAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{manifest['status']}: {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
