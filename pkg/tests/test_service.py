import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from mangamarks import dataset as ds
from mangamarks.schema import GROUP_BY_KIND, GroupKind, LandmarkSet
from mangamarks.service import create_app

from conftest import make_face_points


def masked(points, kinds):
    present = np.ones(60, dtype=bool)
    for kind in kinds:
        g = GROUP_BY_KIND[kind]
        present[g.start : g.stop] = False
    return LandmarkSet(points, present)


MASK = (
    GroupKind.NOSE,
    GroupKind.LEFT_PUPIL,
    GroupKind.RIGHT_PUPIL,
    GroupKind.LEFT_EYEBROW,
    GroupKind.RIGHT_EYEBROW,
)


@pytest.fixture
def workspace(tmp_path):
    image = Image.fromarray(np.full((120, 120), 200, dtype=np.uint8))
    image.save(tmp_path / "face.png")
    pts_a = make_face_points()
    pts_b = pts_a.copy()
    pts_b[5] += (0.0, 5.0)  # one chin point well past the 2 px tolerance
    records = [
        ds.FaceRecord("t1", "face.png", (5.0, 5.0, 100.0, 110.0)),
        ds.FaceRecord(
            "t2", "face.png", (5.0, 5.0, 100.0, 110.0),
            annotations={
                "alice": masked(pts_a, MASK),
                "bob": masked(pts_b, MASK),
            },
        ),
    ]
    manifest = tmp_path / "manifest.jsonl"
    ds.write_manifest(records, manifest)
    return tmp_path, manifest


@pytest.fixture
def client(workspace):
    tmp_path, manifest = workspace
    return TestClient(create_app(manifest, tmp_path))


def test_list_and_filter(client):
    rows = client.get("/api/tasks").json()
    assert [r["id"] for r in rows] == ["t1", "t2"]
    assert rows[0]["status"] == "unlabeled"
    assert rows[1]["status"] == "flagged"
    only = client.get("/api/tasks", params={"status": "flagged"}).json()
    assert [r["id"] for r in only] == ["t2"]
    assert client.get("/api/tasks", params={"status": "bogus"}).status_code == 422


def test_get_task_and_image(client):
    task = client.get("/api/tasks/t2").json()
    assert task["version"] == 0
    assert sorted(task["annotations"]) == ["alice", "bob"]
    assert task["crop"]["canvas"] == 256
    resp = client.get("/api/images/t2")
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    assert resp.content[:8] == b"\x89PNG\r\n\x1a\n"
    assert client.get("/api/tasks/nope").status_code == 404


def test_annotation_versioning(client):
    points = ds.landmarks_to_json(masked(make_face_points(), MASK))
    resp = client.put(
        "/api/tasks/t1/annotations/alice", json={"version": 0, "points": points}
    )
    assert resp.status_code == 200
    assert resp.json() == {"version": 1, "status": "single-labeled"}
    # a second writer holding the old version must fail
    stale = client.put(
        "/api/tasks/t1/annotations/bob", json={"version": 0, "points": points}
    )
    assert stale.status_code == 409
    ok = client.put(
        "/api/tasks/t1/annotations/bob", json={"version": 1, "points": points}
    )
    assert ok.json() == {"version": 2, "status": "double-labeled"}


def test_disagreements_and_merge_flow(client):
    dis = client.get("/api/tasks/t2/disagreements").json()
    assert dis["flagged"] == [5]
    assert dis["presence_mismatches"] == []
    assert dis["distances"]["5"] == pytest.approx(5.0)

    # merge is rejected while flagged
    rejected = client.post("/api/tasks/t2/merge", json={"version": 0})
    assert rejected.status_code == 409
    assert "5" in rejected.json()["detail"]

    # relabel bob to agree, then merge and complete
    fixed = ds.landmarks_to_json(masked(make_face_points(), MASK))
    v = client.put(
        "/api/tasks/t2/annotations/bob", json={"version": 0, "points": fixed}
    ).json()["version"]
    merged = client.post("/api/tasks/t2/merge", json={"version": v}).json()
    assert merged["status"] == "merged"
    done = client.post("/api/tasks/t2/merge", json={"version": v})
    assert done.status_code == 409  # version moved on

    completed = client.post(
        "/api/tasks/t2/complete", json={"version": merged["version"]}
    )
    assert completed.status_code == 200
    body = completed.json()
    assert body["status"] == "completed"
    assert all(p is not None for p in body["completed"])


def test_persistence_across_restart(workspace, client):
    tmp_path, manifest = workspace
    fixed = ds.landmarks_to_json(masked(make_face_points(), MASK))
    v = client.put(
        "/api/tasks/t2/annotations/bob", json={"version": 0, "points": fixed}
    ).json()["version"]
    v = client.post("/api/tasks/t2/merge", json={"version": v}).json()["version"]
    client.post("/api/tasks/t2/complete", json={"version": v})

    fresh = TestClient(create_app(manifest, tmp_path))
    task = fresh.get("/api/tasks/t2").json()
    assert task["status"] == "completed"
    assert task["completed"] is not None


def test_editing_resets_downstream_state(client):
    fixed = ds.landmarks_to_json(masked(make_face_points(), MASK))
    v = client.put(
        "/api/tasks/t2/annotations/bob", json={"version": 0, "points": fixed}
    ).json()["version"]
    v = client.post("/api/tasks/t2/merge", json={"version": v}).json()["version"]
    resp = client.put(
        "/api/tasks/t2/annotations/alice", json={"version": v, "points": fixed}
    )
    assert resp.json()["status"] == "double-labeled"  # merge was invalidated


def test_predictions_unavailable_without_checkpoint(client):
    assert client.get("/api/tasks/t2/predictions").status_code == 503


def test_complete_requires_merge(client):
    resp = client.post("/api/tasks/t2/complete", json={"version": 0})
    assert resp.status_code == 409
