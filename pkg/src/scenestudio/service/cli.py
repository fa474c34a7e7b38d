"""`studio` command: serve the HTTP API or run a one-shot manipulation."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..data.io import load_image_png, load_labels_png, save_image_png
from ..data.types import AttributeVector
from ..errors import ContractError
from ..transfer.pipeline import TransferConfig
from . import engine
from .registry import CHECKPOINT_DIR_ENV, CheckpointRegistry


def parse_attributes(text: str) -> dict[str, float]:
    """'night=0.8,clouds=0.3' -> {'night': 0.8, 'clouds': 0.3}"""
    mapping: dict[str, float] = {}
    if not text:
        return mapping
    for part in text.split(","):
        name, _, value = part.partition("=")
        if not name or not value:
            raise ContractError(f"cannot parse attribute assignment {part!r}")
        try:
            mapping[name.strip()] = float(value)
        except ValueError as exc:
            raise ContractError(f"attribute {name!r} has non-numeric value {value!r}") from exc
    return mapping


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="studio", description="Scene attribute manipulation service.")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--checkpoint", default=None,
                       help=f"checkpoint path (relative to ${CHECKPOINT_DIR_ENV})")
    serve.add_argument("--checkpoint-dir", default=None)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    manip = sub.add_parser("manipulate", help="one-shot manipulation to a PNG")
    manip.add_argument("--input", required=True, help="input image PNG")
    manip.add_argument("--layout", required=True, help="label-map PNG")
    manip.add_argument("--attr", default="",
                       help="comma-joined assignments, e.g. night=0.8,clouds=0.3")
    manip.add_argument("--seed", type=int, default=0)
    manip.add_argument("--out", required=True, help="output PNG for the final image")
    manip.add_argument("--checkpoint", required=True,
                       help=f"checkpoint path (relative to ${CHECKPOINT_DIR_ENV})")
    manip.add_argument("--checkpoint-dir", default=None)
    manip.add_argument("--alpha", type=float, default=None)
    manip.add_argument("--lambda-f", type=float, default=None)
    manip.add_argument("--dump-stages", default=None,
                       help="directory for per-stage PNGs")
    return parser


def _run_manipulate(args) -> int:
    registry = CheckpointRegistry(args.checkpoint_dir)
    loaded = registry.load(args.checkpoint)
    image = load_image_png(Path(args.input))
    labels = load_labels_png(Path(args.layout))
    attrs = AttributeVector.from_mapping(parse_attributes(args.attr),
                                         loaded.attribute_names)
    overrides = {}
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.lambda_f is not None:
        overrides["lambda_fidelity"] = args.lambda_f
    config = TransferConfig(**overrides) if overrides else TransferConfig()
    result = engine.manipulate(loaded.generator, image, labels, attrs,
                               seed=args.seed, config=config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_image_png(result.final, out)
    if args.dump_stages:
        stage_dir = Path(args.dump_stages)
        stage_dir.mkdir(parents=True, exist_ok=True)
        save_image_png(result.hallucination, stage_dir / "hallucination.png")
        for name, stage in result.stages.items():
            save_image_png(np.clip(stage, -1.0, 1.0), stage_dir / f"{name}.png")
    print(f"wrote {out} (checkpoint {loaded.file_hash[:12]}, seed {args.seed})")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .app import create_app
        app = create_app(checkpoint=args.checkpoint,
                         checkpoint_dir=args.checkpoint_dir)
        uvicorn.run(app, host=args.host, port=args.port)
        return 0
    return _run_manipulate(args)


if __name__ == "__main__":
    sys.exit(main())
