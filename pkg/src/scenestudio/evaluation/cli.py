"""Command line entry point: evaluate checkpoints into a metric report."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..data.io import load_als18k
from ..errors import CheckpointError
from ..nets.checkpoint import load_checkpoint
from .harness import evaluate_checkpoint, format_ablation_table, write_report
from .surrogates import load_surrogates, save_surrogates, train_surrogates


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evaluate",
        description="Score generator checkpoints on a dataset's test split.")
    parser.add_argument("--checkpoint", action="append", required=True,
                        help="checkpoint file; repeat for an ablation table")
    parser.add_argument("--data", required=True, help="dataset directory")
    parser.add_argument("--report", required=True, help="output report JSON path")
    parser.add_argument("--surrogates", default=None,
                        help="surrogate bundle (.npz); default <data>/surrogates.npz")
    parser.add_argument("--train-surrogates", action="store_true",
                        help="fit surrogates on the dataset and save them first")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--splits", type=int, default=10)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    split = load_als18k(args.data)
    surrogate_path = Path(args.surrogates or Path(args.data) / "surrogates.npz")

    if args.train_surrogates:
        surrogates = train_surrogates(split)
        save_surrogates(surrogates, surrogate_path)
        logging.info("saved surrogates to %s (%s)", surrogate_path, surrogates.scores)
    else:
        try:
            surrogates = load_surrogates(surrogate_path)
        except CheckpointError as exc:
            print(f"error: {exc}\n"
                  f"Evaluation needs frozen surrogate networks. Fit them once with:\n"
                  f"  evaluate --data {args.data} --train-surrogates "
                  f"--checkpoint ... --report ...\n"
                  f"or pass an existing bundle via --surrogates.", file=sys.stderr)
            return 2

    rows = []
    for path in args.checkpoint:
        bundle = load_checkpoint(path)
        name = bundle.meta.get("variant", Path(path).stem)
        report = evaluate_checkpoint(bundle, split, surrogates,
                                     seed=args.seed, splits=args.splits)
        rows.append((name, report))

    print(format_ablation_table(rows))
    write_report(rows, args.report)
    logging.info("wrote %s", args.report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
