"""Checkpoint registry: which frozen generator the service is running."""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from pathlib import Path

from ..data.constants import DESK_ATTRIBUTE_NAMES
from ..errors import CheckpointError
from ..nets.checkpoint import (checkpoint_file_hash, load_checkpoint,
                               restore_generator)
from ..nets.generator import SceneGenerator

CHECKPOINT_DIR_ENV = "SCENESTUDIO_CHECKPOINT_DIR"


@dataclass(frozen=True)
class LoadedCheckpoint:
    generator: SceneGenerator
    file_hash: str
    path: str
    attribute_names: tuple[str, ...]
    meta: dict


class CheckpointRegistry:
    """Holds the active checkpoint; swaps are atomic, inference is lock-free.

    A failed load leaves the previously active checkpoint in place, so a bad
    file never takes the service down.
    """

    def __init__(self, checkpoint_dir: str | Path | None = None):
        self._dir = Path(checkpoint_dir or os.environ.get(CHECKPOINT_DIR_ENV, "."))
        self._lock = threading.Lock()
        self._active: LoadedCheckpoint | None = None

    def resolve(self, path: str | Path) -> Path:
        path = Path(path)
        return path if path.is_absolute() else self._dir / path

    def load(self, path: str | Path) -> LoadedCheckpoint:
        resolved = self.resolve(path)
        if not resolved.exists():
            raise CheckpointError(f"checkpoint not found: {resolved}")
        bundle = load_checkpoint(resolved)
        generator = restore_generator(bundle)
        for p in generator.parameters():
            p.requires_grad_(False)
        names = bundle.meta.get("attribute_names")
        loaded = LoadedCheckpoint(
            generator=generator,
            file_hash=checkpoint_file_hash(resolved),
            path=str(resolved),
            attribute_names=tuple(names) if names else DESK_ATTRIBUTE_NAMES,
            meta=dict(bundle.meta),
        )
        with self._lock:
            self._active = loaded
        return loaded

    @property
    def active(self) -> LoadedCheckpoint | None:
        with self._lock:
            return self._active

    def require(self) -> LoadedCheckpoint:
        active = self.active
        if active is None:
            raise CheckpointError("no checkpoint loaded")
        return active
