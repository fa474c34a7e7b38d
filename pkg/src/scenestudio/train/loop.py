"""Three-phase adversarial training loop.

Phase 1 trains the coarse branch alone against half-resolution targets.
Phase 2 trains the fine branch with the coarse branch frozen. Phase 3
fine-tunes both jointly. The same three match-aware discriminators serve all
phases (they are resolution-agnostic); each phase gets fresh Adam moments
since its objective and operating resolution change.

All randomness — batch order, flips, noise, negative conditions — derives
from (seed, phase, epoch), so a resumed run continues bit-for-bit where it
stopped and two runs with one seed are identical.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import torch
from torch.nn import functional as F

from ..data.preprocess import resize_nearest
from ..data.types import DatasetSplit
from ..errors import CheckpointError, ContractError, TrainingDivergenceError
from ..nets.checkpoint import (CheckpointBundle, load_checkpoint, save_checkpoint,
                               write_bundle)
from ..nets.discriminator import (DiscriminatorPyramid, image_pyramid,
                                  layout_planes_pyramid)
from ..nets.generator import SceneGenerator
from ..nets.specs import DiscriminatorSpec, GeneratorSpec
from .losses import (discriminator_loss, generator_adversarial_loss,
                     perceptual_loss)
from .negatives import (nearest_negative_indices, random_negative_indices,
                        sample_negative_attributes)
from .perceptual import PerceptualConfig, SegmentationNet, train_segmentation

log = logging.getLogger(__name__)

LOG_COLUMNS = ("phase", "epoch", "d_loss", "g_adv", "g_perceptual",
               "d_real", "d_fake", "seconds")


@dataclass(frozen=True)
class TrainConfig:
    coarse_epochs: int = 100
    fine_epochs: int = 10
    joint_epochs: int = 70
    batch_size: int = 40
    lr: float = 2e-4
    betas: tuple[float, float] = (0.5, 0.999)
    lambda_perceptual: float = 10.0
    flip_prob: float = 0.5
    use_rnm: bool = True
    use_perceptual: bool = True
    feature_source: str = "segmentation"
    perceptual: PerceptualConfig = field(default_factory=PerceptualConfig)
    seed: int = 0

    def __post_init__(self):
        if self.feature_source == "imagenet":
            raise NotImplementedError(
                "pretrained classification features are not available in this "
                "environment; use feature_source='segmentation'")
        if self.feature_source != "segmentation":
            raise ContractError(f"unknown feature_source {self.feature_source!r}")
        if self.batch_size < 1:
            raise ContractError("batch_size must be positive")

    def to_json(self) -> str:
        payload = asdict(self)
        payload["betas"] = list(self.betas)
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, payload: str) -> "TrainConfig":
        data = json.loads(payload)
        data["betas"] = tuple(data["betas"])
        data["perceptual"] = PerceptualConfig(**data["perceptual"])
        return cls(**data)


def _flip_batch(images: np.ndarray, labels: np.ndarray,
                flips: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mirror the selected samples horizontally — image and layout together."""
    images = images.copy()
    labels = labels.copy()
    images[flips] = images[flips][..., ::-1]
    labels[flips] = labels[flips][..., ::-1]
    return images, labels


def _optimizer_arrays(opt: torch.optim.Optimizer, prefix: str) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    state = opt.state_dict()["state"]
    for pid, entries in state.items():
        for key, val in entries.items():
            tensor = val if isinstance(val, torch.Tensor) else torch.tensor(val)
            arrays[f"{prefix}.{pid}.{key}"] = tensor.detach().cpu().numpy()
    return arrays


def _restore_optimizer(opt: torch.optim.Optimizer, arrays: dict[str, np.ndarray],
                       prefix: str) -> None:
    sd = opt.state_dict()
    state: dict[int, dict] = {}
    for name, arr in arrays.items():
        if not name.startswith(prefix + "."):
            continue
        _, pid, key = name.rsplit(".", 2)
        state.setdefault(int(pid), {})[key] = torch.from_numpy(arr.copy())
    sd["state"] = state
    opt.load_state_dict(sd)


class Trainer:
    def __init__(self, split: DatasetSplit, gen_spec: GeneratorSpec,
                 disc_spec: DiscriminatorSpec, config: TrainConfig,
                 out_dir: str | Path):
        torch.set_num_threads(1)  # keeps reduction order, and thus runs, reproducible
        if gen_spec.num_attributes != len(split.attribute_names):
            raise ContractError("generator spec and dataset disagree on attribute count")
        if disc_spec.num_attributes != gen_spec.num_attributes \
                or disc_spec.layout_bits != gen_spec.layout_bits:
            raise ContractError("generator and discriminator specs disagree on conditioning")
        self.split = split
        self.config = config
        self.gen_spec = gen_spec
        self.disc_spec = disc_spec
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

        samples = split.train
        side = gen_spec.fine_resolution
        for s in samples:
            if s.image.shape[:2] != (side, side):
                raise ContractError(f"sample {s.id} is {s.image.shape[:2]}, "
                                    f"generator expects {(side, side)}")
        self.images = np.stack([s.image.transpose(2, 0, 1) for s in samples])
        self.labels = np.stack([s.layout.labels for s in samples])
        self.attrs = np.stack([s.attributes.values for s in samples]).astype(np.float32)

        self.neighbor_table = (nearest_negative_indices(self.labels)
                               if config.use_rnm else None)
        self.extractor: SegmentationNet | None = None
        self.extractor_accuracy: float | None = None
        if config.use_perceptual:
            self.extractor, self.extractor_accuracy = train_segmentation(
                split, replace(config.perceptual, seed=config.seed),
                num_classes=gen_spec.num_classes)

        torch.manual_seed(config.seed)
        self.gen = SceneGenerator(gen_spec)
        self.disc = DiscriminatorPyramid(disc_spec)
        self.history: list[dict] = []
        self.phase_idx = 0
        self.epoch_in_phase = 0
        self.opt_g: torch.optim.Adam | None = None
        self.opt_d: torch.optim.Adam | None = None

    # ---- phases ----------------------------------------------------------

    def phases(self) -> list[tuple[str, int]]:
        c = self.config
        return [("coarse", c.coarse_epochs), ("fine", c.fine_epochs),
                ("joint", c.joint_epochs)]

    def _generator_params(self, phase: str):
        if phase == "coarse":
            return list(self.gen.coarse.parameters())
        if phase == "fine":
            return list(self.gen.fine.parameters())
        return list(self.gen.parameters())

    def _enter_phase(self, phase: str) -> None:
        for p in self.gen.parameters():
            p.requires_grad_(True)
        if phase == "fine":
            for p in self.gen.coarse.parameters():
                p.requires_grad_(False)
        self.opt_g = torch.optim.Adam(self._generator_params(phase),
                                      lr=self.config.lr, betas=self.config.betas)
        self.opt_d = torch.optim.Adam(self.disc.parameters(),
                                      lr=self.config.lr, betas=self.config.betas)

    # ---- one epoch -------------------------------------------------------

    def _negative_layout_indices(self, rng: np.random.Generator,
                                 idx: np.ndarray) -> np.ndarray:
        if self.neighbor_table is not None:
            return self.neighbor_table[idx]
        return random_negative_indices(rng, self.images.shape[0])[idx]

    def _planes_pyramid(self, labels_op: np.ndarray) -> list[torch.Tensor]:
        levels = layout_planes_pyramid(labels_op, self.gen_spec.layout_bits,
                                       self.gen_spec.num_classes)
        return [torch.from_numpy(lv) for lv in levels]

    def _run_epoch(self, phase: str, epoch: int) -> dict:
        cfg = self.config
        rng = np.random.default_rng([cfg.seed, 101 + self.phase_idx, epoch])
        torch_gen = torch.Generator().manual_seed(int(rng.integers(0, 2 ** 62)))
        n = self.images.shape[0]
        perm = rng.permutation(n)
        side = self.gen_spec.fine_resolution
        base = self.gen_spec.base_resolution
        sums = {"d_loss": 0.0, "g_adv": 0.0, "g_perceptual": 0.0,
                "d_real": 0.0, "d_fake": 0.0}
        batches = 0
        started = time.monotonic()

        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            images_np = self.images[idx]
            labels_np = self.labels[idx]
            flips = rng.random(len(idx)) < cfg.flip_prob
            images_np, labels_np = _flip_batch(images_np, labels_np, flips)

            real_fine = torch.from_numpy(np.ascontiguousarray(images_np))
            attrs = torch.from_numpy(self.attrs[idx])
            planes_fine = self._planes_at(labels_np, side)
            z = torch.randn(len(idx), self.gen_spec.noise_channels, side, side,
                            generator=torch_gen)

            neg_idx = self._negative_layout_indices(rng, idx)
            neg_labels = self.labels[neg_idx]
            neg_attrs = torch.from_numpy(sample_negative_attributes(
                rng, len(idx), self.gen_spec.num_attributes).astype(np.float32))

            if phase == "coarse":
                real_op = F.avg_pool2d(real_fine, 2)
                labels_op = self._downsample_labels(labels_np, base)
                neg_labels_op = self._downsample_labels(neg_labels, base)
                fake_op = self.gen.forward_coarse(z, planes_fine, attrs)
            else:
                real_op = real_fine
                labels_op = labels_np
                neg_labels_op = neg_labels
                _, fake_op = self.gen(z, planes_fine, attrs)

            planes_pyr = self._planes_pyramid(labels_op)
            neg_planes_pyr = self._planes_pyramid(neg_labels_op)
            real_pyr = image_pyramid(real_op)

            # discriminator step: real matched, generated, real mismatched
            self.opt_d.zero_grad(set_to_none=True)
            fake_pyr_detached = image_pyramid(fake_op.detach())
            real_scores = self.disc(real_pyr, attrs, planes_pyr)
            fake_scores = self.disc(fake_pyr_detached, attrs, planes_pyr)
            mismatch_scores = self.disc(real_pyr, neg_attrs, neg_planes_pyr)
            d_loss = sum(discriminator_loss(r, f, m) for r, f, m
                         in zip(real_scores, fake_scores, mismatch_scores))
            d_loss.backward()
            self.opt_d.step()

            # generator step against the just-updated discriminators
            self.opt_g.zero_grad(set_to_none=True)
            gen_scores = self.disc(image_pyramid(fake_op), attrs, planes_pyr)
            g_adv = generator_adversarial_loss(gen_scores)
            if self.extractor is not None:
                g_perc = perceptual_loss(self.extractor.features(real_op),
                                         self.extractor.features(fake_op))
                g_loss = g_adv + cfg.lambda_perceptual * g_perc
            else:
                g_perc = torch.zeros(())
                g_loss = g_adv
            g_loss.backward()
            self.opt_g.step()

            sums["d_loss"] += float(d_loss.detach())
            sums["g_adv"] += float(g_adv.detach())
            sums["g_perceptual"] += float(g_perc.detach())
            sums["d_real"] += float(torch.cat(real_scores).detach().mean())
            sums["d_fake"] += float(torch.cat(fake_scores).detach().mean())
            batches += 1

        row = {key: sums[key] / batches for key in sums}
        if not all(np.isfinite(v) for v in row.values()):
            raise TrainingDivergenceError(
                f"non-finite training loss in phase {phase!r} epoch {epoch}: {row}")
        row.update(phase=phase, epoch=epoch, seconds=time.monotonic() - started)
        return row

    @staticmethod
    def _downsample_labels(labels: np.ndarray, side: int) -> np.ndarray:
        return np.stack([resize_nearest(lab, side, side) for lab in labels])

    def _planes_at(self, labels: np.ndarray, side: int) -> torch.Tensor:
        return self._planes_pyramid(self._downsample_labels(labels, side))[0]

    # ---- run control -----------------------------------------------------

    def train(self, stop_after_epochs: int | None = None) -> Path:
        """Run every remaining epoch; returns the final checkpoint path.

        ``stop_after_epochs`` bails out mid-run after that many epochs (the
        run state on disk then supports ``resume``), returning the run-state
        path instead.
        """
        phase_list = self.phases()
        ran = 0
        while self.phase_idx < len(phase_list):
            phase, epochs = phase_list[self.phase_idx]
            if self.epoch_in_phase == 0 and epochs > 0:
                log.info("entering phase %r (%d epochs)", phase, epochs)
            if self.epoch_in_phase < epochs and self.opt_g is None:
                self._enter_phase(phase)
            while self.epoch_in_phase < epochs:
                row = self._run_epoch(phase, self.epoch_in_phase)
                self.history.append(row)
                self.epoch_in_phase += 1
                self._write_log()
                state_path = self.save_run_state()
                log.info("phase %s epoch %d/%d: d=%.3f g=%.3f",
                         phase, self.epoch_in_phase, epochs, row["d_loss"], row["g_adv"])
                ran += 1
                if stop_after_epochs is not None and ran >= stop_after_epochs:
                    return state_path
            self.phase_idx += 1
            self.epoch_in_phase = 0
            self.opt_g = None
            self.opt_d = None
        return self.save_final()

    # ---- persistence -----------------------------------------------------

    def _write_log(self) -> None:
        with open(self.out_dir / "training_log.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=LOG_COLUMNS)
            writer.writeheader()
            for row in self.history:
                writer.writerow({k: row[k] for k in LOG_COLUMNS})

    def _meta(self) -> dict:
        return {
            "config": self.config.to_json(),
            "seed": self.config.seed,
            "phase_idx": self.phase_idx,
            "epoch_in_phase": self.epoch_in_phase,
            "extractor_accuracy": self.extractor_accuracy,
            "variant": self.variant_name(),
        }

    def variant_name(self) -> str:
        tags = [tag for flag, tag in ((self.config.use_rnm, "rnm"),
                                      (self.config.use_perceptual, "perceptual"))
                if flag]
        return "+".join(["base"] + tags)

    def save_run_state(self) -> Path:
        arrays = {}
        for name, tensor in self.gen.state_dict().items():
            arrays[f"generator.{name}"] = tensor.detach().cpu().numpy()
        for name, tensor in self.disc.state_dict().items():
            arrays[f"discriminators.{name}"] = tensor.detach().cpu().numpy()
        if self.extractor is not None:
            for name, tensor in self.extractor.state_dict().items():
                arrays[f"extractor.{name}"] = tensor.detach().cpu().numpy()
        if self.opt_g is not None:
            arrays.update(_optimizer_arrays(self.opt_g, "opt_g"))
            arrays.update(_optimizer_arrays(self.opt_d, "opt_d"))
        path = self.out_dir / "run_state.ckpt"
        write_bundle(path, CheckpointBundle(gen_spec=self.gen_spec,
                                            disc_spec=self.disc_spec,
                                            arrays=arrays, meta=self._meta()))
        return path

    def save_final(self) -> Path:
        path = self.out_dir / "checkpoint.ckpt"
        save_checkpoint(path, self.gen, self.disc, meta={
            "config": self.config.to_json(),
            "seed": self.config.seed,
            "variant": self.variant_name(),
            "extractor_accuracy": self.extractor_accuracy,
            "attribute_names": list(self.split.attribute_names),
            "class_names": list(self.split.manifest.get("class_names", [])),
        })
        return path

    @classmethod
    def resume(cls, out_dir: str | Path, split: DatasetSplit) -> "Trainer":
        path = Path(out_dir) / "run_state.ckpt"
        if not path.exists():
            raise CheckpointError(f"no run state at {path}")
        bundle = load_checkpoint(path)
        config = TrainConfig.from_json(bundle.meta["config"])
        trainer = cls.__new__(cls)
        torch.set_num_threads(1)
        trainer.split = split
        trainer.config = config
        trainer.gen_spec = bundle.gen_spec
        trainer.disc_spec = bundle.disc_spec
        trainer.out_dir = Path(out_dir)
        samples = split.train
        trainer.images = np.stack([s.image.transpose(2, 0, 1) for s in samples])
        trainer.labels = np.stack([s.layout.labels for s in samples])
        trainer.attrs = np.stack([s.attributes.values for s in samples]).astype(np.float32)
        trainer.neighbor_table = (nearest_negative_indices(trainer.labels)
                                  if config.use_rnm else None)
        trainer.gen = SceneGenerator(bundle.gen_spec)
        trainer.disc = DiscriminatorPyramid(bundle.disc_spec)
        gen_state = {k.split(".", 1)[1]: torch.from_numpy(v)
                     for k, v in bundle.arrays.items() if k.startswith("generator.")}
        disc_state = {k.split(".", 1)[1]: torch.from_numpy(v)
                      for k, v in bundle.arrays.items() if k.startswith("discriminators.")}
        trainer.gen.load_state_dict(gen_state)
        trainer.disc.load_state_dict(disc_state)
        trainer.extractor = None
        trainer.extractor_accuracy = bundle.meta.get("extractor_accuracy")
        if config.use_perceptual:
            trainer.extractor = SegmentationNet(bundle.gen_spec.num_classes,
                                                width=config.perceptual.width)
            ext_state = {k.split(".", 1)[1]: torch.from_numpy(v)
                         for k, v in bundle.arrays.items() if k.startswith("extractor.")}
            trainer.extractor.load_state_dict(ext_state)
            for p in trainer.extractor.parameters():
                p.requires_grad_(False)
            trainer.extractor.eval()
        trainer.phase_idx = bundle.meta["phase_idx"]
        trainer.epoch_in_phase = bundle.meta["epoch_in_phase"]
        trainer.history = []
        log_path = trainer.out_dir / "training_log.csv"
        if log_path.exists():
            with open(log_path, newline="") as fh:
                for row in csv.DictReader(fh):
                    trainer.history.append({
                        "phase": row["phase"], "epoch": int(row["epoch"]),
                        **{k: float(row[k]) for k in LOG_COLUMNS[2:]}})
        trainer.opt_g = None
        trainer.opt_d = None
        if trainer.epoch_in_phase > 0:
            phase, _ = trainer.phases()[trainer.phase_idx]
            trainer._enter_phase(phase)
            _restore_optimizer(trainer.opt_g, bundle.arrays, "opt_g")
            _restore_optimizer(trainer.opt_d, bundle.arrays, "opt_d")
        return trainer
