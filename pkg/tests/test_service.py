import base64
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import torch
from fastapi.testclient import TestClient

from scenestudio.data import AttributeVector
from scenestudio.data.constants import DESK_ATTRIBUTE_NAMES
from scenestudio.data.io import load_image_png, save_image_png, save_labels_png
from scenestudio.errors import CheckpointError, ContractError, SolverError, StageFailure
from scenestudio.nets import GeneratorSpec, SceneGenerator, save_checkpoint
from scenestudio.service import (CheckpointRegistry, LayoutEdit, SessionState,
                                 attribute_sweep, create_app, decode_image,
                                 decode_labels, encode_image, encode_labels,
                                 hallucinate, manipulate, preprocess_image,
                                 preprocess_layout, rasterize_edit)
from scenestudio.service.cli import main as studio_main
from scenestudio.service.cli import parse_attributes
from scenestudio.transfer import TransferConfig

torch.set_num_threads(1)


@pytest.fixture(scope="module")
def checkpoint_path(tmp_path_factory):
    spec = GeneratorSpec.desk(fine_resolution=64, scale_divisor=8)
    torch.manual_seed(23)
    gen = SceneGenerator(spec)
    path = tmp_path_factory.mktemp("service") / "model.ckpt"
    save_checkpoint(path, gen, meta={"variant": "untrained",
                                     "attribute_names": list(DESK_ATTRIBUTE_NAMES)})
    return path


@pytest.fixture(scope="module")
def generator(checkpoint_path):
    registry = CheckpointRegistry()
    return registry.load(checkpoint_path).generator


@pytest.fixture(scope="module")
def client(checkpoint_path):
    with TestClient(create_app(checkpoint=str(checkpoint_path))) as c:
        yield c


# ---------------------------------------------------------------------------
# codec


class TestCodec:
    def test_image_round_trip_within_quantization(self, rendered):
        decoded = decode_image(encode_image(rendered))
        assert decoded.shape == rendered.shape
        assert np.abs(decoded - rendered).max() <= 1.0 / 127.5 + 1e-6

    def test_labels_round_trip_exact(self, layout):
        assert np.array_equal(decode_labels(encode_labels(layout.labels)),
                              layout.labels)

    def test_decode_garbage_rejected(self):
        with pytest.raises(ContractError):
            decode_image("not base64 at all!!")
        with pytest.raises(ContractError):
            decode_image(base64.b64encode(b"not a png").decode())

    def test_labels_above_byte_range_rejected(self):
        with pytest.raises(ContractError):
            encode_labels(np.full((4, 4), 300))


# ---------------------------------------------------------------------------
# engine


class TestPreprocess:
    def test_layout_identity_at_target(self, layout):
        assert np.array_equal(preprocess_layout(layout.labels, 64), layout.labels)

    def test_layout_center_crop(self):
        labels = np.tile(np.arange(8), (4, 1))        # 4 rows, cols 0..7
        out = preprocess_layout(labels, 4)
        assert out.shape == (4, 4)
        assert np.array_equal(out, np.tile(np.arange(2, 6), (4, 1)))

    def test_layout_nearest_upscale_keeps_labels(self):
        labels = np.array([[0, 1], [2, 3]])
        out = preprocess_layout(labels, 4)
        assert out.shape == (4, 4)
        assert set(np.unique(out)) == {0, 1, 2, 3}
        assert np.array_equal(out[:2, :2], np.zeros((2, 2), dtype=np.int64))

    def test_image_resize_crop_range(self, rendered):
        tall = np.concatenate([rendered, rendered], axis=0)    # 128 x 64
        out = preprocess_image(tall, 64)
        assert out.shape == (64, 64, 3)
        assert out.min() >= -1.0 and out.max() <= 1.0


class TestEngine:
    def test_hallucinate_deterministic(self, generator, layout, neutral_attrs):
        a = hallucinate(generator, layout.labels, neutral_attrs, seed=9)
        b = hallucinate(generator, layout.labels, neutral_attrs, seed=9)
        c = hallucinate(generator, layout.labels, neutral_attrs, seed=10)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert a.shape == (64, 64, 3)

    def test_hallucinate_rejects_wrong_attribute_count(self, generator, layout):
        bad = AttributeVector(np.zeros(5), ("a", "b", "c", "d", "e"))
        with pytest.raises(ContractError):
            hallucinate(generator, layout.labels, bad)

    def test_hallucinate_rejects_labels_beyond_capacity(self, generator,
                                                        neutral_attrs):
        labels = np.zeros((64, 64), dtype=np.int64)
        labels[0, 0] = 20                          # 4 layout bits: max 15
        with pytest.raises(ContractError):
            hallucinate(generator, labels, neutral_attrs)

    def test_sweep_matches_single_hallucinations(self, generator, layout,
                                                 neutral_attrs):
        images = attribute_sweep(generator, layout.labels, neutral_attrs,
                                 "night", [0.0, 0.5, 1.0], seed=4)
        assert len(images) == 3
        direct = hallucinate(generator, layout.labels,
                             neutral_attrs.replace(night=0.5), seed=4)
        assert np.array_equal(images[1], direct)

    def test_sweep_rejects_unknown_attribute(self, generator, layout,
                                             neutral_attrs):
        with pytest.raises(ContractError):
            attribute_sweep(generator, layout.labels, neutral_attrs, "plasma",
                            [0.5])

    def test_manipulate_produces_stages(self, generator, rendered, layout,
                                        neutral_attrs):
        result = manipulate(generator, rendered, layout.labels, neutral_attrs,
                            seed=2)
        assert result.final.shape == (64, 64, 3)
        assert result.final.min() >= -1.0 and result.final.max() <= 1.0
        assert list(result.stages) == ["stylize", "smooth_affinity",
                                       "screened_poisson"]
        assert result.hallucination.shape == (64, 64, 3)

    def test_manipulate_accepts_mismatched_geometry(self, generator, rendered,
                                                    layout, neutral_attrs):
        wide = np.concatenate([rendered, rendered], axis=1)    # 64 x 128
        result = manipulate(generator, wide, layout.labels, neutral_attrs)
        assert result.final.shape == (64, 64, 3)

    def test_stage_failures_carry_the_stage_tag(self, generator, rendered, layout,
                                                neutral_attrs, monkeypatch):
        import scenestudio.transfer.pipeline as pipeline_module

        def broken(*args, **kwargs):
            raise SolverError("did not converge")

        monkeypatch.setattr(pipeline_module, "smooth_affinity", broken)
        with pytest.raises(StageFailure) as info:
            manipulate(generator, rendered, layout.labels, neutral_attrs)
        assert info.value.stage == "smooth_affinity"

    def test_concurrent_manipulate_matches_serial(self, generator, rendered,
                                                  layout, neutral_attrs):
        serial = manipulate(generator, rendered, layout.labels, neutral_attrs,
                            seed=6)
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(
                lambda _: manipulate(generator, rendered, layout.labels,
                                     neutral_attrs, seed=6), range(4)))
        for result in results:
            assert np.array_equal(result.final, serial.final)


# ---------------------------------------------------------------------------
# sessions


class TestSessions:
    def _session(self, side=16, num_classes=6, undo_limit=50):
        return SessionState(id="t", labels=np.zeros((side, side), dtype=np.int64),
                            num_classes=num_classes, undo_limit=undo_limit)

    def test_paint_then_undo_restores_layout(self):
        session = self._session()
        before = session.labels.copy()
        session.apply_edit(LayoutEdit(label=3, polygon=[(2, 2), (10, 2), (10, 10)]))
        assert not np.array_equal(session.labels, before)
        session.undo()
        assert np.array_equal(session.labels, before)

    def test_full_canvas_paint_yields_single_label(self):
        session = self._session()
        session.apply_edit(LayoutEdit(
            label=2, polygon=[(-1, -1), (17, -1), (17, 17), (-1, 17)]))
        assert set(np.unique(session.labels)) == {2}

    def test_out_of_bounds_stroke_clips_silently(self):
        session = self._session()
        session.apply_edit(LayoutEdit(label=1, brush_path=[(100.0, 100.0)],
                                      brush_radius=2.0))
        assert set(np.unique(session.labels)) == {0}
        assert session.version == 1

    def test_brush_marks_disk_around_point(self):
        mask = rasterize_edit((16, 16), LayoutEdit(
            label=1, brush_path=[(8.0, 8.0)], brush_radius=3.0))
        assert mask[8, 8]
        assert not mask[0, 0]

    def test_undo_stack_bounded(self):
        session = self._session(undo_limit=3)
        snapshots = [session.labels.copy()]
        for i in range(5):
            session.apply_edit(LayoutEdit(
                label=(i % 5) + 1, polygon=[(0, 0), (4 + i, 0), (0, 4 + i)]))
            snapshots.append(session.labels.copy())
        for expected in (snapshots[4], snapshots[3], snapshots[2]):
            session.undo()
            assert np.array_equal(session.labels, expected)
        with pytest.raises(ContractError):
            session.undo()

    def test_label_out_of_range_rejected(self):
        with pytest.raises(ContractError):
            self._session(num_classes=4).apply_edit(
                LayoutEdit(label=9, polygon=[(0, 0), (4, 0), (0, 4)]))

    def test_malformed_edits_rejected(self):
        with pytest.raises(ContractError):
            LayoutEdit(label=1, polygon=[(0, 0), (1, 1)])
        with pytest.raises(ContractError):
            LayoutEdit(label=1, brush_path=[(0, 0)], brush_radius=0.0)
        with pytest.raises(ContractError):
            LayoutEdit(label=1)

    def test_serialize_round_trip(self):
        session = self._session()
        session.apply_edit(LayoutEdit(label=4, polygon=[(1, 1), (9, 1), (9, 9)]))
        session.set_attributes({"night": 0.7})
        restored = SessionState.deserialize(session.serialize())
        assert np.array_equal(restored.labels, session.labels)
        assert restored.version == session.version
        assert restored.attributes == {"night": 0.7}
        assert len(restored.undo_stack) == 1
        restored.undo()
        assert set(np.unique(restored.labels)) == {0}

    def test_unknown_attribute_rejected(self):
        with pytest.raises(ContractError):
            self._session().set_attributes({"plasma": 1.0})


# ---------------------------------------------------------------------------
# HTTP API


class TestApi:
    def test_healthz_reports_checkpoint(self, client):
        body = client.get("/healthz").json()
        assert body["status"] == "ok"
        assert len(body["checkpoint"]) == 64

    def test_attributes_stable_order(self, client):
        first = client.get("/attributes").json()["attributes"]
        assert tuple(first) == DESK_ATTRIBUTE_NAMES
        assert client.get("/attributes").json()["attributes"] == first

    def test_hallucinate_twice_identical_bytes(self, client, layout):
        request = {"layout": encode_labels(layout.labels),
                   "attributes": {"night": 0.5}, "seed": 11}
        a = client.post("/hallucinate", json=request)
        b = client.post("/hallucinate", json=request)
        assert a.status_code == 200
        assert a.json()["image"] == b.json()["image"]
        assert a.json()["seed"] == 11
        assert len(a.json()["checkpoint"]) == 64

    def test_hallucinate_wrong_length_list_rejected(self, client, layout):
        response = client.post("/hallucinate", json={
            "layout": encode_labels(layout.labels), "attributes": [0.5, 0.5]})
        assert response.status_code == 400

    def test_hallucinate_unknown_name_rejected(self, client, layout):
        response = client.post("/hallucinate", json={
            "layout": encode_labels(layout.labels),
            "attributes": {"plasma": 0.5}})
        assert response.status_code == 400

    def test_hallucinate_needs_exactly_one_layout_source(self, client):
        assert client.post("/hallucinate", json={"attributes": {}}).status_code == 400

    def test_no_checkpoint_conflict(self):
        with TestClient(create_app()) as bare:
            response = bare.post("/hallucinate", json={
                "layout": encode_labels(np.zeros((64, 64), dtype=np.int64))})
            assert response.status_code == 409

    def test_bad_checkpoint_load_keeps_service_up(self, client, tmp_path):
        response = client.post("/checkpoint", json={"path": str(tmp_path / "no.ckpt")})
        assert response.status_code == 422
        junk = tmp_path / "junk.ckpt"
        junk.write_bytes(b"garbage bytes")
        assert client.post("/checkpoint",
                           json={"path": str(junk)}).status_code == 422
        assert client.get("/healthz").json()["status"] == "ok"
        assert client.get("/healthz").json()["checkpoint"] is not None

    def test_session_edit_and_undo_flow(self, client):
        session_id = client.post("/session", json={}).json()["id"]
        before = client.get(f"/session/{session_id}").json()["labels"]
        edit = {"label": 3, "polygon": [[4, 4], [40, 4], [40, 40], [4, 40]]}
        assert client.post(f"/session/{session_id}/layout-edit",
                           json=edit).json()["version"] == 1
        after = client.get(f"/session/{session_id}").json()["labels"]
        assert after != before
        client.post(f"/session/{session_id}/undo")
        restored = client.get(f"/session/{session_id}").json()["labels"]
        assert restored == before

    def test_session_brush_edit(self, client):
        session_id = client.post("/session", json={}).json()["id"]
        edit = {"label": 2, "brush": {"path": [[10, 10], [20, 20]], "radius": 3}}
        response = client.post(f"/session/{session_id}/layout-edit", json=edit)
        assert response.status_code == 200
        labels = decode_labels(client.get(f"/session/{session_id}").json()["labels"])
        assert (labels == 2).any()

    def test_session_label_out_of_range(self, client):
        session_id = client.post("/session", json={}).json()["id"]
        edit = {"label": 99, "polygon": [[0, 0], [5, 0], [0, 5]]}
        assert client.post(f"/session/{session_id}/layout-edit",
                           json=edit).status_code == 400

    def test_missing_session_404(self, client):
        assert client.get("/session/ghost").status_code == 404

    def test_hallucinate_from_session_layout(self, client):
        session_id = client.post("/session", json={}).json()["id"]
        response = client.post("/hallucinate", json={"session": session_id})
        assert response.status_code == 200

    def test_sweep_returns_filmstrip(self, client, layout):
        response = client.post("/hallucinate/sweep", json={
            "layout": encode_labels(layout.labels), "attribute": "night",
            "count": 5, "seed": 3})
        body = response.json()
        assert response.status_code == 200
        assert len(body["images"]) == 5
        assert body["values"] == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
        assert len(set(body["images"])) == 5

    def test_manipulate_inline(self, client, rendered, layout):
        request = {"image": encode_image(rendered),
                   "layout": encode_labels(layout.labels),
                   "attributes": {"night": 0.2}, "seed": 5,
                   "dump_stages": True}
        response = client.post("/manipulate", json=request)
        body = response.json()
        assert response.status_code == 200
        assert set(body) >= {"final", "hallucination", "timings", "seed",
                             "checkpoint", "stages"}
        assert list(body["stages"]) == ["stylize", "smooth_affinity",
                                        "screened_poisson"]
        again = client.post("/manipulate", json=request).json()
        assert again["final"] == body["final"]

    def test_manipulate_malformed_image_no_state_change(self, client, layout):
        session_id = client.post("/session", json={}).json()["id"]
        before = client.get(f"/session/{session_id}").json()
        response = client.post("/manipulate", json={
            "image": "@@not-base64@@", "session": session_id})
        assert response.status_code == 400
        assert client.get(f"/session/{session_id}").json() == before

    def test_manipulate_unknown_config_key(self, client, rendered, layout):
        response = client.post("/manipulate", json={
            "image": encode_image(rendered),
            "layout": encode_labels(layout.labels),
            "config": {"gamma": 2.0}})
        assert response.status_code == 400

    def test_manipulate_as_job(self, client, rendered, layout):
        response = client.post("/manipulate", json={
            "image": encode_image(rendered),
            "layout": encode_labels(layout.labels), "wait": False})
        job_id = response.json()["job"]
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            status = client.get(f"/jobs/{job_id}").json()
            if status["status"] in ("done", "error"):
                break
            time.sleep(0.05)
        assert status["status"] == "done"
        assert "final" in status["result"]

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/ghost").status_code == 404

    def test_openapi_covers_endpoints(self, client):
        paths = client.get("/openapi.json").json()["paths"]
        for path in ("/healthz", "/attributes", "/hallucinate",
                     "/hallucinate/sweep", "/manipulate",
                     "/session/{session_id}/layout-edit", "/jobs/{job_id}"):
            assert path in paths


# ---------------------------------------------------------------------------
# CLI


class TestCli:
    def test_parse_attributes(self):
        assert parse_attributes("night=0.8,clouds=0.3") == {
            "night": 0.8, "clouds": 0.3}
        assert parse_attributes("") == {}
        with pytest.raises(ContractError):
            parse_attributes("night")
        with pytest.raises(ContractError):
            parse_attributes("night=dark")

    def test_manipulate_command_writes_png(self, checkpoint_path, rendered,
                                           layout, tmp_path):
        save_image_png(rendered, tmp_path / "input.png")
        save_labels_png(layout.labels, tmp_path / "layout.png")
        out = tmp_path / "result" / "final.png"
        code = studio_main([
            "manipulate", "--input", str(tmp_path / "input.png"),
            "--layout", str(tmp_path / "layout.png"),
            "--attr", "night=0.8,clouds=0.3", "--seed", "7",
            "--checkpoint", str(checkpoint_path),
            "--out", str(out), "--dump-stages", str(tmp_path / "stages")])
        assert code == 0
        final = load_image_png(out)
        assert final.shape == (64, 64, 3)
        assert (tmp_path / "stages" / "hallucination.png").exists()
        assert (tmp_path / "stages" / "screened_poisson.png").exists()

    def test_checkpoint_dir_env_resolution(self, checkpoint_path, monkeypatch):
        from scenestudio.service.registry import CHECKPOINT_DIR_ENV
        monkeypatch.setenv(CHECKPOINT_DIR_ENV, str(checkpoint_path.parent))
        registry = CheckpointRegistry()
        loaded = registry.load(checkpoint_path.name)
        assert loaded.file_hash == CheckpointRegistry().load(checkpoint_path).file_hash

    def test_missing_checkpoint_error(self, tmp_path):
        with pytest.raises(CheckpointError):
            CheckpointRegistry(tmp_path).load("missing.ckpt")
