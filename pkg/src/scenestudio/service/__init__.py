"""Composition layer: manipulation engine, sessions, HTTP API, CLI."""

from .app import create_app
from .codec import decode_image, decode_labels, encode_image, encode_labels
from .engine import (ManipulationResult, attribute_sweep, hallucinate,
                     manipulate, preprocess_image, preprocess_layout)
from .jobs import JobQueue
from .registry import CHECKPOINT_DIR_ENV, CheckpointRegistry, LoadedCheckpoint
from .sessions import (UNDO_LIMIT, LayoutEdit, SessionState, SessionStore,
                       rasterize_edit)

__all__ = [
    "create_app",
    "decode_image",
    "decode_labels",
    "encode_image",
    "encode_labels",
    "ManipulationResult",
    "attribute_sweep",
    "hallucinate",
    "manipulate",
    "preprocess_image",
    "preprocess_layout",
    "JobQueue",
    "CHECKPOINT_DIR_ENV",
    "CheckpointRegistry",
    "LoadedCheckpoint",
    "UNDO_LIMIT",
    "LayoutEdit",
    "SessionState",
    "SessionStore",
    "rasterize_edit",
]
