"""``swarmtune`` command line.

Exit codes: 0 success, 1 objective failure (partial artifacts kept),
2 configuration or input error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import parse_config
from .exceptions import (
    ConfigError,
    DivergenceError,
    DomainError,
    OptimizationError,
    PpmParseError,
)
from .experiment import run_experiment, run_training
from .results import read_trace_csv
from .tinycnn.container import ContainerError, save_dataset
from .tinycnn.data import parse_size, generate_synthetic_dataset, save_dataset_images

logger = logging.getLogger("swarmtune")


def _add_common(p):
    p.add_argument("config", help="experiment config file")
    p.add_argument("--seed", type=int, help="override [experiment] seed")
    p.add_argument("--out", help="override [output] directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmtune", description="PSO / WOA hyperparameter search for a small CNN"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("optimize", help="run the configured search(es)")
    _add_common(p)
    p.add_argument("--equal-budget", action="store_true",
                   help="raise iteration counts so PSO and WOA get the same number of evaluations")
    p.add_argument("--woa-literal-spiral", action="store_true",
                   help="WOA always applies the spiral move after the encircling/exploration step")

    p = sub.add_parser("train", help="train and evaluate the [train] hyperparameters")
    _add_common(p)

    p = sub.add_parser("gen-data", help="write a synthetic PPM dataset")
    p.add_argument("out_dir")
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--size", default="32x32", help="HxW, both even")
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="summarize a trace CSV as a best-so-far curve")
    p.add_argument("trace")
    p.add_argument("--out", help="write the curve CSV here instead of stdout")
    return parser


def _cmd_optimize(args):
    cfg = parse_config(args.config).with_overrides(
        seed=args.seed, output_dir=args.out, equal_budget=args.equal_budget,
        literal_spiral=args.woa_literal_spiral,
    )
    outcome = run_experiment(cfg)
    logger.info("wrote %d files to %s", len(outcome.files), outcome.output_dir)


def _cmd_train(args):
    cfg = parse_config(args.config).with_overrides(seed=args.seed, output_dir=args.out)
    run_training(cfg)


def _cmd_gen_data(args):
    ds = generate_synthetic_dataset(args.classes, args.per_class, parse_size(args.size), args.seed)
    paths = save_dataset_images(ds, args.out_dir)
    save_dataset(f"{args.out_dir}/dataset.tcnn", ds)
    print(f"wrote {len(paths)} images in {ds.n_classes} classes to {args.out_dir}")


def _cmd_report(args):
    try:
        names, records = read_trace_csv(args.trace)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read trace {args.trace!r}: {exc}") from None
    if not records:
        raise ConfigError(f"trace {args.trace!r} has no rows")
    fitness = np.array([r.fitness for r in records])
    best = np.minimum.accumulate(fitness)
    stored = np.array([r.best_so_far for r in records])
    if not np.array_equal(best, stored):
        logger.warning("stored best_so_far differs from the recomputed running minimum")
    lines = ["evaluation,iteration,fitness,best_so_far"]
    for r, b in zip(records, best):
        lines.append(f"{r.evaluation_index},{r.iteration},{r.fitness!r},{float(b)!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    i = int(np.argmin(fitness))
    cand = ", ".join(f"{k}={v}" for k, v in records[i].candidate.items())
    print(f"evaluations: {len(records)}  iterations: {records[-1].iteration}  "
          f"best fitness: {fitness[i]!r} at evaluation {records[i].evaluation_index} ({cand})",
          file=sys.stderr)


COMMANDS = {
    "optimize": _cmd_optimize,
    "train": _cmd_train,
    "gen-data": _cmd_gen_data,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except (ConfigError, DomainError, PpmParseError, ContainerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OptimizationError, DivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
