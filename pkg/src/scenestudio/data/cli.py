"""``scene-data`` command line entry point."""

from __future__ import annotations

import argparse

from .corpus import build_synthetic_corpus
from .constants import DESK_RESOLUTION
from .oracle import desk_recipe


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="scene-data", description="Dataset tooling")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic oracle corpus")
    synth.add_argument("--n-train", type=int, required=True)
    synth.add_argument("--n-test", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)
    synth.add_argument("--resolution", type=int, default=DESK_RESOLUTION)

    args = parser.parse_args(argv)
    if args.command == "synth":
        split = build_synthetic_corpus(
            desk_recipe(), args.n_train, args.n_test, args.seed,
            resolution=args.resolution, out_dir=args.out,
        )
        print(f"wrote {len(split.train)} train / {len(split.test)} test samples to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
