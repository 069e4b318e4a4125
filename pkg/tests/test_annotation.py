"""Annotation service: sessions, drafts, commits, persistence, HTTP API."""

import json
import math
import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from samic.annotation import (
    AlreadyCommittedError,
    AnnotationService,
    EmptyDraftError,
    OutOfBoundsError,
    UnknownImageError,
    UnknownSessionError,
    create_app,
    replay_records,
)
from samic.evaluation.manifest import load_split_manifest
from samic.segmenter.mock import MockSegmenter
from samic.synthetic import generate_dataset
from samic.types import PointPrompt


@pytest.fixture
def images(tmp_path):
    items = generate_dataset(n_images=3, image_size=64, n_classes=2, seed=5)
    paths = []
    for i, item in enumerate(items):
        p = tmp_path / f"img{i}.png"
        Image.fromarray(item.image).save(p)
        paths.append(p)
    return items, paths


@pytest.fixture
def service(tmp_path):
    return AnnotationService(MockSegmenter(), tmp_path / "store")


def wait_ready(session):
    for state in session.images.values():
        state.embedding.result(timeout=30)


def test_open_session_queues_and_schedules(service, images):
    items, paths = images
    session = service.open_session(paths)
    assert len(session.queue) == 3
    wait_ready(session)
    assert service.next_image(session.session_id) == session.queue[0]


def test_open_session_rejects_empty_and_unreadable(service, tmp_path):
    with pytest.raises(ValueError):
        service.open_session([])
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not an image")
    with pytest.raises(ValueError, match="bad.png"):
        service.open_session([bad])


def test_duplicate_content_single_cache_entry(service, images, tmp_path):
    _, paths = images
    copy = tmp_path / "copy.png"
    copy.write_bytes(paths[0].read_bytes())
    session = service.open_session([paths[0], copy])
    wait_ready(session)
    assert len(session.queue) == 2
    assert service.cache.misses == 1 and service.cache.hits == 1


def test_submit_undo_resubmit_identical(service, images):
    items, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    sid, img = session.session_id, session.queue[0]
    pt = items[0].prompts.all_points()[0]
    first = service.submit_prompt(sid, img, 0, pt)
    service.submit_prompt(sid, img, 0, PointPrompt(pt.x + 1, pt.y))
    after_undo = service.undo_last(sid, img)
    np.testing.assert_array_equal(first.mask, after_undo.mask)
    assert first.confidence == after_undo.confidence


def test_confidence_sequence_closed_form(service, images):
    items, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    sid, img = session.session_id, session.queue[0]
    pt = items[0].prompts.all_points()[0]
    confs = []
    for k in range(4):
        result = service.submit_prompt(
            sid, img, 0, PointPrompt(pt.x + k % 2, pt.y + k // 2))
        confs.append(result.confidence)
    assert confs == sorted(confs)
    for k, c in enumerate(confs, start=1):
        assert c == pytest.approx(1.01 * (1 - math.exp(-k)), abs=1e-9)
    assert confs[3] > 0.99


def test_commit_immutable_and_persistent(service, images, tmp_path):
    items, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    sid, img = session.session_id, session.queue[0]
    pt = items[0].prompts.all_points()[0]
    with pytest.raises(EmptyDraftError):
        service.commit_annotation(sid, img)
    service.submit_prompt(sid, img, 0, pt)
    record = service.commit_annotation(sid, img)
    assert record.mask_path.exists()
    with pytest.raises(AlreadyCommittedError):
        service.commit_annotation(sid, img)
    with pytest.raises(AlreadyCommittedError):
        service.submit_prompt(sid, img, 0, pt)
    assert service.next_image(sid) == session.queue[1]

    # a fresh service over the same storage sees the identical record
    reloaded = AnnotationService(MockSegmenter(), service.root)
    back = reloaded.session(sid).images[img].record
    assert back.to_json_dict() == record.to_json_dict()


def test_commit_two_instances_union(service, images):
    items, paths = images
    # find an item with two instances, else synthesize by two separate groups
    session = service.open_session(paths)
    wait_ready(session)
    sid, img = session.session_id, session.queue[0]
    pts = items[0].prompts.all_points()
    service.submit_prompt(sid, img, 0, pts[0])
    second = pts[1] if len(pts) > 1 else pts[0]
    service.submit_prompt(sid, img, 1, second)
    record = service.commit_annotation(sid, img)
    assert len(record.prompts.instances) == 2
    data = json.loads((session.directory / "records" / f"{img}.json").read_text())
    assert data["version"] == 1
    assert len(data["instances"]) == 2


def test_replay_reproduces_masks(service, images):
    items, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    sid = session.session_id
    for item, img in zip(items, session.queue):
        for gi, group in enumerate(item.prompts.instances):
            for pt in group:
                service.submit_prompt(sid, img, gi, pt)
        service.commit_annotation(sid, img)
    outcome = replay_records(service, sid)
    assert len(outcome) == 3
    assert all(outcome.values())


def test_export_round_trip(service, images, tmp_path):
    items, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    sid = session.session_id
    pt = items[0].prompts.all_points()[0]
    service.submit_prompt(sid, session.queue[0], 0, pt)
    service.commit_annotation(sid, session.queue[0])
    out = service.export_dataset(sid, tmp_path / "export")
    index = load_split_manifest(out)
    assert len(index.items) == 1
    item = index.items[0]
    assert item.prompts.all_points()[0].x == pt.x
    assert item.image.shape == (64, 64, 3)


def test_errors_for_unknown_ids(service, images):
    _, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    with pytest.raises(UnknownSessionError):
        service.next_image("ghost")
    with pytest.raises(UnknownImageError):
        service.submit_prompt(session.session_id, "ghost", 0, PointPrompt(1, 1))
    with pytest.raises(OutOfBoundsError):
        service.submit_prompt(session.session_id, session.queue[0], 0,
                              PointPrompt(1000, 1))


def test_concurrent_submissions_all_recorded(service, images):
    items, paths = images
    session = service.open_session(paths)
    wait_ready(session)
    sid, img = session.session_id, session.queue[0]
    pt = items[0].prompts.all_points()[0]
    errors = []

    def worker(k):
        try:
            service.submit_prompt(sid, img, 0, PointPrompt(pt.x + k % 2, pt.y + k // 2))
        except Exception as exc:   # noqa: BLE001 - collected for assertion
            errors.append(exc)

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    state = session.images[img]
    assert len(state.draft[0]) == 4
    assert state.last_result.confidence == pytest.approx(
        1.01 * (1 - math.exp(-4)), abs=1e-9)


class TestHttpApi:
    @pytest.fixture
    def client(self, service, images):
        _, paths = images
        app = create_app(service)
        with TestClient(app) as client:
            client.paths = [str(p) for p in paths]
            yield client

    def open(self, client):
        body = client.post("/v1/sessions", json={"images": client.paths}).json()
        sid = body["session"]
        while True:
            nxt = client.get(f"/v1/sessions/{sid}/next").json()
            if nxt["ready"]:
                return sid, nxt["image"]

    def test_full_loop(self, client, images):
        items, _ = images
        sid, img = self.open(client)
        pt = items[0].prompts.all_points()[0]
        r = client.post(f"/v1/sessions/{sid}/images/{img}/prompts",
                        json={"instance": 0, "point": [pt.x, pt.y]})
        assert r.status_code == 200
        assert r.json()["confidence"] == pytest.approx(
            1.01 * (1 - math.exp(-1)), abs=1e-9)
        assert r.json()["mask_png_base64"]
        mask = client.get(f"/v1/sessions/{sid}/images/{img}/mask.png")
        assert mask.status_code == 200
        assert mask.headers["content-type"] == "image/png"
        commit = client.post(f"/v1/sessions/{sid}/images/{img}/commit")
        assert commit.status_code == 200
        assert commit.json()["next"] != img
        export = client.get(f"/v1/sessions/{sid}/export")
        assert export.status_code == 200
        assert len(export.json()["manifest"]["items"]) == 1

    def test_error_codes(self, client, images):
        items, _ = images
        sid, img = self.open(client)
        assert client.get("/v1/sessions/none/next").status_code == 404
        assert client.post(f"/v1/sessions/{sid}/images/none/prompts",
                           json={"instance": 0, "point": [1, 1]}).status_code == 404
        assert client.post(f"/v1/sessions/{sid}/images/{img}/commit"
                           ).status_code == 409
        assert client.post(f"/v1/sessions/{sid}/images/{img}/prompts",
                           json={"instance": 0, "point": [9999, 1]}
                           ).status_code == 422
        assert client.delete(f"/v1/sessions/{sid}/images/{img}/prompts/last"
                             ).status_code == 409

    def test_undo_route(self, client, images):
        items, _ = images
        sid, img = self.open(client)
        pt = items[0].prompts.all_points()[0]
        client.post(f"/v1/sessions/{sid}/images/{img}/prompts",
                    json={"instance": 0, "point": [pt.x, pt.y]})
        r = client.delete(f"/v1/sessions/{sid}/images/{img}/prompts/last")
        assert r.status_code == 200
        assert r.json()["points"] == 0

    def test_image_route_serves_png(self, client):
        sid, img = self.open(client)
        r = client.get(f"/v1/sessions/{sid}/images/{img}")
        assert r.status_code == 200
        assert r.headers["content-type"] == "image/png"
