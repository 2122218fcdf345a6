"""Command-line orchestration of the annotation/training/evaluation pipeline.

Every command reads its inputs from the configured paths, writes its artifact
atomically (temp file + rename), and is idempotent given identical inputs.
Exit code 0 on success; on failure a machine-parsable line
``error: <code>: <message>`` goes to stderr and the exit code is nonzero.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import augment as aug
from . import dataset as ds
from . import qc
from .cascade import init_model, train as train_cascade, write_loss_curves
from .checkpoint import load_checkpoint, save_checkpoint
from .config import PipelineConfig
from .errors import MangamarksError
from .experiments import format_grid, run_grid
from .geometry import compute_mean_shape
from .metrics import evaluate, write_ced_csv, write_report
from .schema import LandmarkSet


def fail(code: str, message: str) -> None:
    click.echo(f"error: {code}: {message}", err=True)
    sys.exit(1)


def require_artifact(path: Path, producer: str) -> Path:
    if not path.exists():
        fail("missing-artifact", f"{path} not found; run `mangamarks {producer}` first")
    return path


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


class Ctx:
    def __init__(self, config: PipelineConfig, verbose: bool):
        self.config = config
        self.verbose = verbose

    @property
    def workdir(self) -> Path:
        return Path(self.config.paths.workdir)

    def log(self, message: str) -> None:
        if self.verbose:
            click.echo(message, err=True)

    def load_records(self, name: str, producer: str):
        path = require_artifact(self.workdir / name, producer)
        return ds.ingest_manifest(path, self.config.paths.image_root).records

    def load_split(self) -> ds.SplitAssignment:
        path = require_artifact(self.workdir / "split.json", "split")
        return ds.SplitAssignment.from_json(json.loads(path.read_text()))

    def samples_for(self, records, split_assignment, label):
        wanted = set(split_assignment.ids(label))
        return [
            ds.crop_and_normalize(
                r, self.config.paths.image_root, self.config.network.canvas
            )
            for r in records
            if r.record_id in wanted and r.trainable
        ]


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Pipeline config YAML (defaults apply when omitted).")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
def main(ctx, config_path, seed, verbose):
    """Manga face landmark pipeline."""
    try:
        config = PipelineConfig.load(config_path) if config_path else PipelineConfig()
    except (MangamarksError, OSError) as exc:
        fail("config", str(exc))
    if seed is not None:
        config.seed = seed
    ctx.obj = Ctx(config, verbose)


@main.command()
@click.argument("out_dir", type=click.Path())
@click.option("-n", "--count", default=50, show_default=True)
@click.pass_obj
def synth(ctx, out_dir, count):
    """Generate a synthetic manga-face dataset with exact landmarks."""
    from .synthetic import write_synthetic_dataset

    manifest = write_synthetic_dataset(out_dir, count, seed=ctx.config.seed)
    click.echo(f"wrote {count} faces and {manifest}")


@main.command()
@click.pass_obj
def ingest(ctx):
    """Load the manifest, verify image files, and materialize records."""
    manifest = Path(ctx.config.paths.manifest)
    if not manifest.exists():
        fail("missing-artifact", f"manifest {manifest} not found")
    report = ds.ingest_manifest(manifest, ctx.config.paths.image_root)
    for err in report.errors:
        click.echo(f"record error: {err}", err=True)
    ctx.workdir.mkdir(parents=True, exist_ok=True)
    ds.write_manifest(report.records, ctx.workdir / "ingested.jsonl")
    click.echo(f"ingested {len(report.records)} records ({len(report.errors)} errors)")


@main.command("filter")
@click.pass_obj
def filter_cmd(ctx):
    """Apply the selection rules (80 px minimum box, manual exclusion flags)."""
    records = ctx.load_records("ingested.jsonl", "ingest")
    kept, excluded = ds.apply_selection_filters(records)
    ds.write_manifest(kept, ctx.workdir / "filtered.jsonl")
    atomic_write_text(
        ctx.workdir / "excluded.tsv",
        "".join(f"{r.record_id}\t{reason}\n" for r, reason in excluded),
    )
    click.echo(f"kept {len(kept)}, excluded {len(excluded)}")


@main.command("split")
@click.pass_obj
def split_cmd(ctx):
    """Random train/validation/test partition under the configured seed."""
    records = ctx.load_records("filtered.jsonl", "filter")
    try:
        assignment = ds.split(records, ctx.config.dataset.ratios, ctx.config.seed)
    except ValueError as exc:
        fail("split", str(exc))
    atomic_write_text(
        ctx.workdir / "split.json",
        json.dumps(assignment.to_json(), sort_keys=True, indent=1) + "\n",
    )
    labels = list(assignment.assignment.values())
    click.echo(
        f"train {labels.count('train')} / validation {labels.count('validation')}"
        f" / test {labels.count('test')}"
    )


@main.command()
@click.option("--tolerance", default=qc.DEFAULT_TOLERANCE, show_default=True)
@click.pass_obj
def merge(ctx, tolerance):
    """Merge double labelings whose disagreements are within tolerance."""
    records = ctx.load_records("filtered.jsonl", "filter")
    flagged = 0
    for record in records:
        if record.merged is not None:
            continue
        labels = list(record.annotations.values())
        if len(labels) == 1:
            record.merged = labels[0]
        elif len(labels) >= 2:
            report = qc.compare_labels(labels[0], labels[1], tolerance)
            if report.flagged:
                flagged += 1
                ctx.log(f"{record.record_id}: flagged indices {report.flagged}")
                continue
            record.merged = qc.merge_labels(labels[0], labels[1])
    ds.write_manifest(records, ctx.workdir / "merged.jsonl")
    click.echo(f"merged {len(records)} records ({flagged} still flagged)")


@main.command()
@click.pass_obj
def complete(ctx):
    """Fill absent landmark groups with the geometric completion rules."""
    records = ctx.load_records("merged.jsonl", "merge")
    failures = 0
    for record in records:
        if record.completed is not None and record.completed.complete:
            continue
        source = record.merged or next(iter(record.annotations.values()), None)
        if source is None:
            failures += 1
            continue
        try:
            record.completed = qc.complete_all(source)
        except MangamarksError as exc:
            failures += 1
            ctx.log(f"{record.record_id}: {exc}")
    ds.write_manifest(records, ctx.workdir / "completed.jsonl")
    click.echo(f"completed {len(records)} records ({failures} not completable)")


@main.command("augment")
@click.pass_obj
def augment_cmd(ctx):
    """Write the augmented training set (train split only)."""
    records = ctx.load_records("completed.jsonl", "complete")
    assignment = ctx.load_split()
    samples = ctx.samples_for(records, assignment, "train")
    if not samples:
        fail("augment", "no trainable records in the train split")
    mean_shape = compute_mean_shape(
        [s.landmarks for s in samples], ctx.config.network.canvas,
        ctx.config.network.margin,
    )
    augmented = aug.augment_dataset(
        samples, ctx.config.augmentation.spec(), mean_shape, seed=ctx.config.seed
    )
    out = ctx.workdir / "augmented.npz"
    tmp = out.with_name("augmented.tmp.npz")  # savez insists on a .npz suffix
    np.savez_compressed(
        tmp,
        images=np.stack([s.image for s in augmented]).astype(np.float32),
        landmarks=np.stack([s.landmarks.points for s in augmented]),
        ids=np.array([s.record_id for s in augmented]),
    )
    tmp.replace(out)
    click.echo(f"wrote {len(augmented)} augmented samples to {out}")


def _load_augmented(path):
    data = np.load(path, allow_pickle=False)
    return [
        ds.TrainingSample(
            image=data["images"][i].astype(np.float64),
            landmarks=LandmarkSet(data["landmarks"][i]),
            record_id=str(data["ids"][i]),
            augmentation_id=i,
        )
        for i in range(len(data["images"]))
    ]


@main.command("train")
@click.pass_obj
def train_cmd(ctx):
    """Train the cascade stage by stage and write the checkpoint."""
    records = ctx.load_records("completed.jsonl", "complete")
    assignment = ctx.load_split()
    val_samples = ctx.samples_for(records, assignment, "validation")
    if ctx.config.augmentation.enabled:
        aug_path = require_artifact(ctx.workdir / "augmented.npz", "augment")
        train_samples = _load_augmented(aug_path)
    else:
        train_samples = ctx.samples_for(records, assignment, "train")
    if not train_samples or not val_samples:
        fail("train", "empty train or validation split")
    mean_samples = ctx.samples_for(records, assignment, "train")
    mean_shape = compute_mean_shape(
        [s.landmarks for s in mean_samples], ctx.config.network.canvas,
        ctx.config.network.margin,
    )
    try:
        model = init_model(
            ctx.config.network.cascade_config(), mean_shape, seed=ctx.config.seed
        )
        curves = train_cascade(
            model, train_samples, val_samples,
            ctx.config.training.schedule(ctx.config.seed),
        )
    except MangamarksError as exc:
        fail("train", str(exc))
    checkpoint = Path(ctx.config.paths.checkpoint)
    checkpoint.parent.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, checkpoint)
    write_loss_curves(curves, checkpoint.parent / "loss_curves.tsv")
    click.echo(f"trained {ctx.config.network.stages} stage(s); wrote {checkpoint}")


@main.command("eval")
@click.pass_obj
def eval_cmd(ctx):
    """Evaluate the checkpoint on the test split and write the report."""
    records = ctx.load_records("completed.jsonl", "complete")
    assignment = ctx.load_split()
    checkpoint = require_artifact(Path(ctx.config.paths.checkpoint), "train")
    model = load_checkpoint(checkpoint)
    samples = ctx.samples_for(records, assignment, "test")
    if not samples:
        fail("eval", "no trainable records in the test split")
    report = evaluate(model, samples, ctx.config.evaluation.threshold)
    report_dir = Path(ctx.config.paths.report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    write_report(report, report_dir / "report.txt")
    write_ced_csv(report, report_dir / "ced.csv")
    predictions = [
        {"id": s.record_id,
         "points": ds.landmarks_to_json(model.forward(s.image))}
        for s in samples
    ]
    atomic_write_text(
        report_dir / "predictions.jsonl",
        "".join(json.dumps(p, sort_keys=True) + "\n" for p in predictions),
    )
    click.echo(
        f"mean error {report.mean_error:.5f}, A_alpha {report.auc:.5f}, "
        f"failure rate {100 * report.failure_rate:.2f}%"
    )


@main.command()
@click.argument("images", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default="predictions.jsonl",
              show_default=True)
@click.pass_obj
def predict(ctx, images, output):
    """Predict landmarks for standalone face crop images."""
    from .geometry import warp_image

    checkpoint = require_artifact(Path(ctx.config.paths.checkpoint), "train")
    model = load_checkpoint(checkpoint)
    canvas = model.config.canvas
    rows = []
    for path in images:
        image = ds.load_grayscale(path)
        h, w = image.shape
        transform = ds.crop_transform_for_bbox((0, 0, w, h), canvas)
        crop = warp_image(image, transform, out_shape=(canvas, canvas), fill=1.0)
        pred = model.forward(crop)
        back = transform.inverse().apply(pred.points)
        rows.append({"id": Path(path).name, "points": ds.landmarks_to_json(LandmarkSet(back))})
    atomic_write_text(
        Path(output), "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    )
    click.echo(f"wrote {len(rows)} prediction(s) to {output}")


@main.command()
@click.pass_obj
def grid(ctx):
    """Run the four-cell experiment grid (1-2 stages x augmentation on/off)."""
    records = ctx.load_records("completed.jsonl", "complete")
    assignment = ctx.load_split()
    train_samples = ctx.samples_for(records, assignment, "train")
    val_samples = ctx.samples_for(records, assignment, "validation")
    test_samples = ctx.samples_for(records, assignment, "test")
    if not train_samples or not val_samples or not test_samples:
        fail("grid", "one of the splits has no trainable records")
    rows = run_grid(
        train_samples, val_samples, test_samples,
        ctx.config.network.cascade_config(),
        ctx.config.training.schedule(ctx.config.seed),
        ctx.config.augmentation.spec(),
    )
    summary = format_grid(rows)
    report_dir = Path(ctx.config.paths.report_dir)
    atomic_write_text(report_dir / "grid_summary.tsv", summary)
    click.echo(summary, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.pass_obj
def serve(ctx, host, port):
    """Serve the annotation HTTP API backing the labeling UI."""
    import uvicorn

    from .service import create_app

    manifest = Path(ctx.config.paths.manifest)
    if not manifest.exists():
        fail("missing-artifact", f"manifest {manifest} not found")
    checkpoint = Path(ctx.config.paths.checkpoint)
    app = create_app(
        manifest,
        ctx.config.paths.image_root,
        checkpoint if checkpoint.exists() else None,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
