"""Command-line front end.

Subcommands:
  run            execute an experiment config, writing records.jsonl,
                 summary.csv, and manifest.json to the output directory
  resume         complete an interrupted run (no-op when finished)
  verify-oracle  compare the sweep implementation against brute-force
                 path enumeration on randomized queries
  shape          print the free-energy rate for a direction

Exit status: 0 on success (and oracle pass), 1 on oracle failure, 2 on
configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import __version__
from .errors import PolymerError
from .oracle import verify_oracle
from .records import format_float
from .runner import resume_experiment, run_experiment
from .stats import diagonal_shape_rate, shape_value


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config["master_seed"] = args.seed
    result = run_experiment(config, out_dir=args.out, threads=args.threads)
    state = "completed" if result.completed else "interrupted"
    print(f"{state}: {result.computed} new records, outputs in {result.out_dir} "
          f"({result.wall_time_s:.2f}s)")
    return 0


def _cmd_resume(args) -> int:
    config = _load_config(args.config) if args.config else None
    if config is not None and args.seed is not None:
        config["master_seed"] = args.seed
    result = resume_experiment(args.out, config=config, threads=args.threads)
    state = "completed" if result.completed else "interrupted"
    print(f"{state}: {result.computed} new records, outputs in {result.out_dir}")
    return 0


def _cmd_verify_oracle(args) -> int:
    report = verify_oracle(max_level=args.max_level, trials=args.trials, seed=args.seed)
    print(report.render())
    return 0 if report.passed else 1


def _cmd_shape(args) -> int:
    v = shape_value(args.mu, args.x, args.y)
    print(f"rate({format_float(args.x)}, {format_float(args.y)}) = {format_float(v)}")
    if args.x == args.y:
        closed = args.x * diagonal_shape_rate(args.mu)
        print(f"diagonal closed form = {format_float(closed)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polymer",
        description="Lattice polymer partition functions and Monte Carlo experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True, help="path to the JSON config")
    run.add_argument("--out", default=None, help="output directory (overrides config out_dir)")
    run.add_argument("--threads", type=int, default=None,
                     help="worker processes (overrides config and POLYMER_THREADS)")
    run.add_argument("--seed", type=int, default=None,
                     help="master seed override (changes the run identity)")
    run.set_defaults(fn=_cmd_run)

    res = sub.add_parser("resume", help="complete an interrupted run")
    res.add_argument("--out", required=True, help="output directory of the run")
    res.add_argument("--config", default=None,
                     help="optional config path; must match the recorded run")
    res.add_argument("--threads", type=int, default=None)
    res.add_argument("--seed", type=int, default=None,
                     help="applied to --config before the match check")
    res.set_defaults(fn=_cmd_resume)

    ver = sub.add_parser("verify-oracle",
                         help="check the sweep against brute-force enumeration")
    ver.add_argument("--max-level", type=int, default=12)
    ver.add_argument("--trials", type=int, default=200)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(fn=_cmd_verify_oracle)

    shp = sub.add_parser("shape", help="print the free-energy rate for a direction")
    shp.add_argument("--mu", type=float, required=True)
    shp.add_argument("--x", type=float, default=1.0)
    shp.add_argument("--y", type=float, default=1.0)
    shp.set_defaults(fn=_cmd_shape)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except PolymerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
