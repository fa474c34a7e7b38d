"""Command line for adversarial training runs: `sgn train`, `sgn resume`."""

from __future__ import annotations

import argparse
import logging
import sys

from ..data.io import load_als18k
from ..nets.specs import DiscriminatorSpec, GeneratorSpec
from .loop import TrainConfig, Trainer
from .perceptual import PerceptualConfig


def _add_train_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory (manifest.json inside)")
    p.add_argument("--out", required=True, help="run directory for logs and checkpoints")
    p.add_argument("--coarse-epochs", type=int, default=100)
    p.add_argument("--fine-epochs", type=int, default=10)
    p.add_argument("--joint-epochs", type=int, default=70)
    p.add_argument("--batch-size", type=int, default=40)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--lambda-perceptual", type=float, default=10.0)
    p.add_argument("--scale-divisor", type=int, default=1)
    p.add_argument("--layout-bits", type=int, default=8)
    p.add_argument("--noise-channels", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-rnm", action="store_true",
                   help="draw mismatch layouts uniformly instead of nearest-ranked")
    p.add_argument("--no-perceptual", action="store_true",
                   help="drop the feature-matching term from the generator loss")
    p.add_argument("--perceptual-epochs", type=int, default=60)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgn", description="scene generator training")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_train_args(sub.add_parser("train", help="run the three training phases"))
    resume = sub.add_parser("resume", help="continue an interrupted run")
    resume.add_argument("--data", required=True)
    resume.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    split = load_als18k(args.data)
    if args.command == "resume":
        trainer = Trainer.resume(args.out, split)
    else:
        fine_side = split.manifest["resolution"]
        gen_spec = GeneratorSpec(
            fine_resolution=fine_side,
            num_classes=split.num_classes,
            num_attributes=len(split.attribute_names),
            layout_bits=args.layout_bits,
            noise_channels=args.noise_channels,
            scale_divisor=args.scale_divisor,
        )
        disc_spec = DiscriminatorSpec(
            num_attributes=gen_spec.num_attributes,
            layout_bits=args.layout_bits,
            scale_divisor=args.scale_divisor,
        )
        config = TrainConfig(
            coarse_epochs=args.coarse_epochs,
            fine_epochs=args.fine_epochs,
            joint_epochs=args.joint_epochs,
            batch_size=args.batch_size,
            lr=args.lr,
            lambda_perceptual=args.lambda_perceptual,
            use_rnm=not args.no_rnm,
            use_perceptual=not args.no_perceptual,
            perceptual=PerceptualConfig(epochs=args.perceptual_epochs, seed=args.seed),
            seed=args.seed,
        )
        trainer = Trainer(split, gen_spec, disc_spec, config, args.out)
    path = trainer.train()
    print(f"checkpoint written to {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
