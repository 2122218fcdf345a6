"""HTTP API backing the annotation UI.

One task per face record.  Each task carries a monotonically increasing
version; writes must quote the version they observed and a stale write is
rejected with 409 so two annotators cannot silently overwrite each other.
All mutations persist the full manifest under a single writer lock.

Task status machine:

    unlabeled -> single-labeled -> double-labeled <-> flagged
                                        |
                                     merged -> completed

A task is `flagged` while its two labelings disagree beyond the tolerance;
re-annotating either labeling moves it back to double-labeled when the
disagreement clears.  Merge is rejected while flagged.
"""

from __future__ import annotations

import io
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from . import dataset as ds
from . import qc
from .errors import MangamarksError
from .geometry import warp_image
from .schema import NUM_LANDMARKS

IMAGE_CANVAS = 256

STATUSES = (
    "unlabeled", "single-labeled", "double-labeled", "flagged", "merged",
    "completed",
)


class AnnotationBody(BaseModel):
    version: int
    points: list[list[float] | None]


class ActionBody(BaseModel):
    version: int
    tolerance: float = qc.DEFAULT_TOLERANCE


class TaskStore:
    """In-memory task state persisted to the manifest on every mutation."""

    def __init__(self, manifest: Path, image_root, checkpoint: Path | None = None):
        self.manifest = Path(manifest)
        self.image_root = Path(image_root) if image_root is not None else Path(".")
        self.lock = threading.Lock()
        report = ds.ingest_manifest(self.manifest, self.image_root)
        self.records = {r.record_id: r for r in report.records}
        self.order = [r.record_id for r in report.records]
        self.versions = {rid: 0 for rid in self.order}
        self.model = None
        if checkpoint is not None:
            from .checkpoint import load_checkpoint

            self.model = load_checkpoint(checkpoint)

    def record(self, task_id: str) -> ds.FaceRecord:
        record = self.records.get(task_id)
        if record is None:
            raise HTTPException(404, f"no task {task_id}")
        return record

    def status(self, record: ds.FaceRecord, tolerance: float = qc.DEFAULT_TOLERANCE) -> str:
        if record.completed is not None:
            return "completed"
        if record.merged is not None:
            return "merged"
        n = len(record.annotations)
        if n == 0:
            return "unlabeled"
        if n == 1:
            return "single-labeled"
        labels = list(record.annotations.values())
        report = qc.compare_labels(labels[0], labels[1], tolerance)
        return "flagged" if not report.clean else "double-labeled"

    def check_version(self, task_id: str, version: int) -> None:
        current = self.versions[task_id]
        if version != current:
            raise HTTPException(
                409, f"stale version {version}; task {task_id} is at {current}"
            )

    def bump_and_persist(self, task_id: str) -> int:
        self.versions[task_id] += 1
        ds.write_manifest(
            [self.records[rid] for rid in self.order], self.manifest
        )
        return self.versions[task_id]

    def summary(self, record: ds.FaceRecord) -> dict:
        return {
            "id": record.record_id,
            "status": self.status(record),
            "version": self.versions[record.record_id],
            "labelers": sorted(record.annotations),
            "flags": list(record.flags),
        }


def create_app(manifest, image_root=None, checkpoint=None) -> FastAPI:
    store = TaskStore(manifest, image_root, checkpoint)
    app = FastAPI(title="mangamarks annotation service")

    @app.get("/api/tasks")
    def list_tasks(status: str | None = Query(default=None)):
        if status is not None and status not in STATUSES:
            raise HTTPException(422, f"unknown status {status!r}")
        with store.lock:
            rows = [store.summary(store.records[rid]) for rid in store.order]
        if status is not None:
            rows = [r for r in rows if r["status"] == status]
        return rows

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str):
        with store.lock:
            record = store.record(task_id)
            transform = ds.crop_transform_for_bbox(record.bbox, IMAGE_CANVAS)
            return {
                **store.summary(record),
                "bbox": list(record.bbox),
                "crop": {
                    "canvas": IMAGE_CANVAS,
                    "scale": transform.scale,
                    "tx": transform.tx,
                    "ty": transform.ty,
                },
                "annotations": {
                    name: ds.landmarks_to_json(points)
                    for name, points in record.annotations.items()
                },
                "merged": ds.landmarks_to_json(record.merged),
                "completed": ds.landmarks_to_json(record.completed),
            }

    @app.get("/api/images/{task_id}")
    def get_image(task_id: str):
        with store.lock:
            record = store.record(task_id)
        from PIL import Image
        import numpy as np

        image = ds.load_grayscale(store.image_root / record.image_path)
        transform = ds.crop_transform_for_bbox(record.bbox, IMAGE_CANVAS)
        crop = warp_image(
            image, transform, out_shape=(IMAGE_CANVAS, IMAGE_CANVAS), fill=1.0
        )
        buf = io.BytesIO()
        Image.fromarray((crop * 255).round().astype(np.uint8)).save(buf, "PNG")
        return Response(buf.getvalue(), media_type="image/png")

    @app.put("/api/tasks/{task_id}/annotations/{labeler}")
    def put_annotation(task_id: str, labeler: str, body: AnnotationBody):
        if len(body.points) != NUM_LANDMARKS:
            raise HTTPException(
                422, f"expected {NUM_LANDMARKS} landmark entries, got {len(body.points)}"
            )
        with store.lock:
            record = store.record(task_id)
            store.check_version(task_id, body.version)
            try:
                landmarks = ds.landmarks_from_json(body.points)
            except MangamarksError as exc:
                raise HTTPException(422, str(exc))
            record.annotations[labeler] = landmarks
            # editing a labeling invalidates any downstream merge/completion
            record.merged = None
            record.completed = None
            version = store.bump_and_persist(task_id)
            return {"version": version, "status": store.status(record)}

    @app.get("/api/tasks/{task_id}/disagreements")
    def get_disagreements(task_id: str, tolerance: float = qc.DEFAULT_TOLERANCE):
        with store.lock:
            record = store.record(task_id)
            labels = list(record.annotations.values())
            if len(labels) < 2:
                raise HTTPException(409, "task does not have two labelings")
            report = qc.compare_labels(labels[0], labels[1], tolerance)
            return {
                "tolerance": tolerance,
                "flagged": report.flagged,
                "presence_mismatches": report.presence_mismatches,
                "distances": {str(i): d for i, d in report.distances.items()},
            }

    @app.post("/api/tasks/{task_id}/merge")
    def merge_task(task_id: str, body: ActionBody):
        with store.lock:
            record = store.record(task_id)
            store.check_version(task_id, body.version)
            labels = list(record.annotations.values())
            if len(labels) < 2:
                raise HTTPException(409, "task does not have two labelings")
            report = qc.compare_labels(labels[0], labels[1], body.tolerance)
            if not report.clean:
                raise HTTPException(
                    409,
                    f"task is flagged at indices {report.flagged}; "
                    "resolve disagreements before merging",
                )
            record.merged = qc.merge_labels(labels[0], labels[1])
            version = store.bump_and_persist(task_id)
            return {"version": version, "status": store.status(record)}

    @app.post("/api/tasks/{task_id}/complete")
    def complete_task(task_id: str, body: ActionBody):
        with store.lock:
            record = store.record(task_id)
            store.check_version(task_id, body.version)
            if record.merged is None:
                raise HTTPException(409, "merge the task before completing it")
            try:
                record.completed = qc.complete_all(record.merged)
            except MangamarksError as exc:
                raise HTTPException(422, str(exc))
            version = store.bump_and_persist(task_id)
            return {
                "version": version,
                "status": store.status(record),
                "completed": ds.landmarks_to_json(record.completed),
            }

    @app.get("/api/tasks/{task_id}/predictions")
    def get_predictions(task_id: str):
        if store.model is None:
            raise HTTPException(503, "no model checkpoint loaded")
        with store.lock:
            record = store.record(task_id)
        canvas = store.model.config.canvas
        image = ds.load_grayscale(store.image_root / record.image_path)
        transform = ds.crop_transform_for_bbox(record.bbox, canvas)
        crop = warp_image(image, transform, out_shape=(canvas, canvas), fill=1.0)
        pred = store.model.forward(crop)
        from .schema import LandmarkSet

        back = transform.inverse().apply(pred.points)
        return {"points": ds.landmarks_to_json(LandmarkSet(back))}

    return app
