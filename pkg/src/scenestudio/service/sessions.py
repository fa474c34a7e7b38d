"""Editable layout sessions: rasterized edits, bounded undo, serialization."""

from __future__ import annotations

import base64
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageDraw

from ..data.constants import DESK_ATTRIBUTE_NAMES, DESK_NUM_CLASSES
from ..errors import ContractError
from .codec import decode_labels, encode_labels

UNDO_LIMIT = 50


@dataclass
class LayoutEdit:
    """One region edit: a filled polygon or a brush stroke along a path."""

    label: int
    polygon: list[tuple[float, float]] | None = None
    brush_path: list[tuple[float, float]] | None = None
    brush_radius: float = 0.0

    def __post_init__(self):
        if (self.polygon is None) == (self.brush_path is None):
            raise ContractError("an edit is either a polygon or a brush stroke")
        if self.polygon is not None and len(self.polygon) < 3:
            raise ContractError("polygon edits need at least 3 points")
        if self.brush_path is not None:
            if not self.brush_path:
                raise ContractError("brush edits need at least 1 point")
            if self.brush_radius <= 0:
                raise ContractError("brush radius must be positive")


def rasterize_edit(shape: tuple[int, int], edit: LayoutEdit) -> np.ndarray:
    """Boolean mask of the edited pixels; out-of-bounds geometry clips away."""
    canvas = Image.new("L", (shape[1], shape[0]), 0)
    draw = ImageDraw.Draw(canvas)
    if edit.polygon is not None:
        draw.polygon([(float(x), float(y)) for x, y in edit.polygon], fill=1)
    else:
        radius = float(edit.brush_radius)
        points = [(float(x), float(y)) for x, y in edit.brush_path]
        for (x0, y0), (x1, y1) in zip(points, points[1:]):
            draw.line([(x0, y0), (x1, y1)], fill=1, width=max(1, round(2 * radius)))
        for x, y in points:
            draw.ellipse([x - radius, y - radius, x + radius, y + radius], fill=1)
    return np.asarray(canvas, dtype=bool)


@dataclass
class SessionState:
    """One user's editable scene: layout raster, attributes, recent results."""

    id: str
    labels: np.ndarray
    num_classes: int = DESK_NUM_CLASSES
    attribute_names: tuple[str, ...] = DESK_ATTRIBUTE_NAMES
    attributes: dict[str, float] = field(default_factory=dict)
    version: int = 0
    undo_stack: list[np.ndarray] = field(default_factory=list)
    undo_limit: int = UNDO_LIMIT
    last_hallucination: np.ndarray | None = None
    last_manipulation: np.ndarray | None = None

    def apply_edit(self, edit: LayoutEdit) -> int:
        """Rasterize the edit into the layout; returns the new version."""
        if not 0 <= edit.label < self.num_classes:
            raise ContractError(
                f"label {edit.label} outside [0, {self.num_classes})")
        mask = rasterize_edit(self.labels.shape, edit)
        self.undo_stack.append(self.labels.copy())
        if len(self.undo_stack) > self.undo_limit:
            self.undo_stack.pop(0)
        self.labels[mask] = edit.label
        self.version += 1
        return self.version

    def undo(self) -> int:
        if not self.undo_stack:
            raise ContractError("nothing to undo")
        self.labels = self.undo_stack.pop()
        self.version += 1
        return self.version

    def set_attributes(self, attributes: dict[str, float]) -> None:
        unknown = set(attributes) - set(self.attribute_names)
        if unknown:
            raise ContractError(f"unknown attribute names: {sorted(unknown)}")
        self.attributes = {k: float(v) for k, v in attributes.items()}

    def serialize(self) -> dict:
        return {
            "id": self.id,
            "version": self.version,
            "height": int(self.labels.shape[0]),
            "width": int(self.labels.shape[1]),
            "num_classes": self.num_classes,
            "attribute_names": list(self.attribute_names),
            "attributes": dict(self.attributes),
            "labels": encode_labels(self.labels),
            "undo_stack": [encode_labels(entry) for entry in self.undo_stack],
            "undo_limit": self.undo_limit,
        }

    @classmethod
    def deserialize(cls, payload: dict) -> "SessionState":
        return cls(
            id=payload["id"],
            labels=decode_labels(payload["labels"]),
            num_classes=payload["num_classes"],
            attribute_names=tuple(payload["attribute_names"]),
            attributes=dict(payload.get("attributes", {})),
            version=payload.get("version", 0),
            undo_stack=[decode_labels(e) for e in payload.get("undo_stack", [])],
            undo_limit=payload.get("undo_limit", UNDO_LIMIT),
        )


class SessionStore:
    """Sessions by id, each guarded by its own lock (one writer at a time)."""

    def __init__(self):
        self._sessions: dict[str, tuple[SessionState, threading.Lock]] = {}
        self._lock = threading.Lock()

    def create(self, resolution: int, num_classes: int = DESK_NUM_CLASSES,
               attribute_names: tuple[str, ...] = DESK_ATTRIBUTE_NAMES,
               labels: np.ndarray | None = None) -> SessionState:
        if labels is None:
            labels = np.zeros((resolution, resolution), dtype=np.int64)
        session = SessionState(id=uuid.uuid4().hex[:12], labels=np.asarray(labels),
                               num_classes=num_classes, attribute_names=attribute_names)
        with self._lock:
            self._sessions[session.id] = (session, threading.Lock())
        return session

    def get(self, session_id: str) -> tuple[SessionState, threading.Lock]:
        with self._lock:
            if session_id not in self._sessions:
                raise KeyError(session_id)
            return self._sessions[session_id]
