"""HTTP surface: scene generation and manipulation over JSON + base64 PNGs."""

from __future__ import annotations

import dataclasses
import logging

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from ..data.constants import DESK_ATTRIBUTE_NAMES, DESK_RESOLUTION
from ..data.types import AttributeVector
from ..errors import CheckpointError, ContractError, StageFailure
from ..transfer.pipeline import TransferConfig
from . import engine
from .codec import decode_image, decode_labels, encode_image, encode_labels
from .jobs import JobQueue
from .registry import CheckpointRegistry
from .sessions import LayoutEdit, SessionStore

log = logging.getLogger(__name__)


class CheckpointBody(BaseModel):
    path: str


class SessionBody(BaseModel):
    resolution: int | None = None
    layout: str | None = None


class BrushBody(BaseModel):
    path: list[tuple[float, float]]
    radius: float


class EditBody(BaseModel):
    label: int
    polygon: list[tuple[float, float]] | None = None
    brush: BrushBody | None = None


class AttributesBody(BaseModel):
    attributes: dict[str, float]


class HallucinateBody(BaseModel):
    layout: str | None = None
    session: str | None = None
    attributes: dict[str, float] | list[float] = {}
    seed: int = 0


class SweepBody(HallucinateBody):
    attribute: str
    values: list[float] | None = None
    count: int = 5


class ManipulateBody(HallucinateBody):
    image: str = ""
    config: dict | None = None
    dump_stages: bool = False
    wait: bool = True


def _attribute_vector(payload, names: tuple[str, ...]) -> AttributeVector:
    if isinstance(payload, dict):
        return AttributeVector.from_mapping(payload, names)
    return AttributeVector(np.asarray(payload, dtype=np.float64), names)


def _transfer_config(overrides: dict | None) -> TransferConfig:
    if not overrides:
        return TransferConfig()
    known = {f.name for f in dataclasses.fields(TransferConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ContractError(f"unknown transfer config fields: {sorted(unknown)}")
    return TransferConfig(**overrides)


def create_app(checkpoint: str | None = None,
               checkpoint_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="scenestudio", version="1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    registry = CheckpointRegistry(checkpoint_dir)
    sessions = SessionStore()
    jobs = JobQueue()
    app.state.registry, app.state.sessions, app.state.jobs = registry, sessions, jobs
    if checkpoint:
        registry.load(checkpoint)

    @app.exception_handler(ContractError)
    async def contract_error(request: Request, exc: ContractError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(CheckpointError)
    async def checkpoint_error(request: Request, exc: CheckpointError):
        status = 409 if "no checkpoint loaded" in str(exc) else 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.exception_handler(StageFailure)
    async def stage_failure(request: Request, exc: StageFailure):
        return JSONResponse(status_code=500,
                            content={"detail": str(exc), "stage": exc.stage})

    @app.exception_handler(KeyError)
    async def missing_key(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"detail": f"not found: {exc}"})

    @app.get("/healthz")
    def healthz():
        active = registry.active
        return {"status": "ok",
                "checkpoint": active.file_hash if active else None}

    @app.get("/attributes")
    def attributes():
        active = registry.active
        names = active.attribute_names if active else DESK_ATTRIBUTE_NAMES
        return {"attributes": list(names)}

    @app.post("/checkpoint")
    def load_checkpoint(body: CheckpointBody):
        loaded = registry.load(body.path)
        return {"checkpoint": loaded.file_hash, "path": loaded.path,
                "attributes": list(loaded.attribute_names)}

    @app.post("/session")
    def create_session(body: SessionBody):
        active = registry.active
        resolution = body.resolution or (
            active.generator.spec.fine_resolution if active else DESK_RESOLUTION)
        labels = decode_labels(body.layout) if body.layout else None
        names = active.attribute_names if active else DESK_ATTRIBUTE_NAMES
        session = sessions.create(resolution, attribute_names=names, labels=labels)
        return {"id": session.id, "version": session.version}

    @app.get("/session/{session_id}")
    def get_session(session_id: str):
        session, lock = sessions.get(session_id)
        with lock:
            return session.serialize()

    @app.post("/session/{session_id}/layout-edit")
    def layout_edit(session_id: str, body: EditBody):
        session, lock = sessions.get(session_id)
        edit = LayoutEdit(
            label=body.label,
            polygon=body.polygon,
            brush_path=body.brush.path if body.brush else None,
            brush_radius=body.brush.radius if body.brush else 0.0,
        )
        with lock:
            version = session.apply_edit(edit)
        return {"id": session_id, "version": version}

    @app.post("/session/{session_id}/undo")
    def undo(session_id: str):
        session, lock = sessions.get(session_id)
        with lock:
            version = session.undo()
        return {"id": session_id, "version": version}

    @app.post("/session/{session_id}/attributes")
    def set_attributes(session_id: str, body: AttributesBody):
        session, lock = sessions.get(session_id)
        with lock:
            session.set_attributes(body.attributes)
            return {"id": session_id, "attributes": dict(session.attributes)}

    def _resolve_labels(body: HallucinateBody) -> np.ndarray:
        if (body.layout is None) == (body.session is None):
            raise ContractError("provide exactly one of 'layout' or 'session'")
        if body.layout is not None:
            return decode_labels(body.layout)
        session, lock = sessions.get(body.session)
        with lock:
            return session.labels.copy()

    @app.post("/hallucinate")
    def hallucinate(body: HallucinateBody):
        active = registry.require()
        labels = _resolve_labels(body)
        attrs = _attribute_vector(body.attributes, active.attribute_names)
        image = engine.hallucinate(active.generator, labels, attrs, seed=body.seed)
        if body.session:
            session, lock = sessions.get(body.session)
            with lock:
                session.last_hallucination = image
        return {"image": encode_image(image), "seed": body.seed,
                "checkpoint": active.file_hash}

    @app.post("/hallucinate/sweep")
    def sweep(body: SweepBody):
        active = registry.require()
        labels = _resolve_labels(body)
        attrs = _attribute_vector(body.attributes, active.attribute_names)
        if body.values is not None:
            values = [float(v) for v in body.values]
        else:
            if body.count < 2:
                raise ContractError("sweep count must be at least 2")
            values = np.linspace(0.0, 1.0, body.count).tolist()
        images = engine.attribute_sweep(active.generator, labels, attrs,
                                        body.attribute, values, seed=body.seed)
        return {"images": [encode_image(im) for im in images], "values": values,
                "attribute": body.attribute, "seed": body.seed,
                "checkpoint": active.file_hash}

    @app.post("/manipulate")
    def manipulate(body: ManipulateBody):
        active = registry.require()
        if not body.image:
            raise ContractError("manipulate needs an input image")
        image = decode_image(body.image)
        labels = _resolve_labels(body)
        attrs = _attribute_vector(body.attributes, active.attribute_names)
        config = _transfer_config(body.config)

        def compute() -> dict:
            result = engine.manipulate(active.generator, image, labels, attrs,
                                       seed=body.seed, config=config)
            payload = {
                "final": encode_image(result.final),
                "hallucination": encode_image(result.hallucination),
                "timings": result.timings,
                "seed": body.seed,
                "checkpoint": active.file_hash,
            }
            if body.dump_stages:
                payload["stages"] = {k: encode_image(v)
                                     for k, v in result.stages.items()}
            if body.session:
                session, lock = sessions.get(body.session)
                with lock:
                    session.last_manipulation = result.final
            return payload

        if body.wait:
            return compute()
        return {"job": jobs.submit(compute), "seed": body.seed,
                "checkpoint": active.file_hash}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        return jobs.status(job_id)

    return app
