"""Chin-normalized evaluation: per-face error, failure rate, CED and A_alpha.

Published reference results for the four-experiment grid (stages x
augmentation) are kept as constants for report context; they are not
reproducible targets because the original dataset is not bundled.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationError
from .schema import CHIN_LEFT, CHIN_RIGHT, NUM_LANDMARKS, LandmarkSet

FAILURE_THRESHOLD = 0.0333

# (stages, augmented) -> (mean error, A_0.0333, failure rate %)
REFERENCE_RESULTS = {
    (1, True): (0.03933, 0.10338, 48.28),
    (1, False): (0.04355, 0.08964, 52.41),
    (2, True): (0.02935, 0.24295, 19.31),
    (2, False): (0.03467, 0.16357, 37.93),
}


@dataclass(frozen=True)
class PerFaceError:
    record_id: str
    mean_distance: float  # pixels
    chin_distance: float  # pixels

    @property
    def normalized(self) -> float:
        return self.mean_distance / self.chin_distance


def chin_distance(truth: LandmarkSet) -> float:
    """Euclidean distance between the first and last chin-contour landmarks."""
    if not (truth.present[CHIN_LEFT] and truth.present[CHIN_RIGHT]):
        raise EvaluationError("chin endpoints (indices 0 and 16) must be present")
    return float(np.linalg.norm(truth.points[CHIN_RIGHT] - truth.points[CHIN_LEFT]))


def normalized_error(
    pred: LandmarkSet, truth: LandmarkSet, record_id: str = ""
) -> PerFaceError:
    """Mean prediction-to-truth distance divided by the truth's chin distance."""
    if not (pred.complete and truth.complete):
        raise EvaluationError("normalized error requires complete landmark sets")
    d_chin = chin_distance(truth)
    if d_chin == 0.0:
        raise EvaluationError("ground-truth chin distance is zero")
    mean_d = float(np.linalg.norm(pred.points - truth.points, axis=1).mean())
    return PerFaceError(record_id, mean_d, d_chin)


def interannotator_distance(a: LandmarkSet, b: LandmarkSet) -> float:
    """Normalized error between two labelings, chin taken from the second."""
    return normalized_error(a, b).normalized


def failure_rate(errors, threshold: float = FAILURE_THRESHOLD) -> float:
    """Fraction of faces whose normalized error is strictly above the threshold."""
    errors = np.asarray(list(errors), dtype=np.float64)
    if errors.size == 0:
        raise EvaluationError("failure rate of an empty error list is undefined")
    # Computed as 1 - CED(threshold) so the identity with the CED is exact
    # in floating point, not just up to rounding.
    return 1.0 - float((errors <= threshold).mean())


def ced_curve(errors, alpha: float = FAILURE_THRESHOLD):
    """Cumulative error distribution CED(t) = |{S_i <= t}| / n as step samples.

    Samples are emitted at every distinct error value plus t = 0 and t = alpha,
    sorted by threshold.
    """
    errors = np.sort(np.asarray(list(errors), dtype=np.float64))
    if errors.size == 0:
        raise EvaluationError("CED of an empty error list is undefined")
    thresholds = np.unique(np.concatenate([errors, [0.0, alpha]]))
    fractions = np.searchsorted(errors, thresholds, side="right") / errors.size
    return list(zip(thresholds.tolist(), fractions.tolist()))


def auc_ced(errors, alpha: float = FAILURE_THRESHOLD) -> float:
    """Area under the CED up to alpha, divided by alpha (exact step integral)."""
    if alpha <= 0:
        raise EvaluationError("alpha must be positive")
    errors = np.sort(np.asarray(list(errors), dtype=np.float64))
    if errors.size == 0:
        raise EvaluationError("A_alpha of an empty error list is undefined")
    n = errors.size
    area = 0.0
    # Jump points of the step function inside [0, alpha].
    jumps = np.unique(errors[(errors >= 0) & (errors <= alpha)])
    points = np.concatenate([[0.0], jumps, [alpha]])
    points = np.unique(points[points <= alpha])
    for left, right in zip(points[:-1], points[1:]):
        value = np.searchsorted(errors, left, side="right") / n
        area += value * (right - left)
    # CED is right-continuous; the interval [last_point, alpha] uses CED(last).
    return area / alpha


@dataclass
class EvalReport:
    per_face: list[PerFaceError]
    threshold: float = FAILURE_THRESHOLD

    @property
    def errors(self) -> list[float]:
        return [e.normalized for e in self.per_face]

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.errors))

    @property
    def failure_rate(self) -> float:
        return failure_rate(self.errors, self.threshold)

    @property
    def auc(self) -> float:
        return auc_ced(self.errors, self.threshold)

    @property
    def ced(self):
        return ced_curve(self.errors, self.threshold)


def evaluate_predictions(pairs, threshold: float = FAILURE_THRESHOLD) -> EvalReport:
    """Assemble a report from (record_id, predicted, truth) triples."""
    per_face = [normalized_error(pred, truth, rid) for rid, pred, truth in pairs]
    if not per_face:
        raise EvaluationError("cannot evaluate an empty sample list")
    return EvalReport(per_face, threshold)


def evaluate(model, samples, threshold: float = FAILURE_THRESHOLD) -> EvalReport:
    """Run a trained cascade on samples and build the aggregate report."""
    pairs = []
    for sample in samples:
        pred = model.forward(sample.image)
        pairs.append((sample.record_id, pred, sample.landmarks))
    return evaluate_predictions(pairs, threshold)


def write_report(report: EvalReport, path) -> None:
    """Structured text report: aggregate statistics plus per-face rows."""
    lines = [
        f"mean_error\t{report.mean_error:.10f}",
        f"auc_{report.threshold:g}\t{report.auc:.10f}",
        f"failure_rate\t{report.failure_rate:.10f}",
        f"faces\t{len(report.per_face)}",
        "",
        "record_id\tmean_distance_px\tchin_distance_px\tnormalized_error",
    ]
    for e in report.per_face:
        lines.append(
            f"{e.record_id}\t{e.mean_distance:.10f}\t{e.chin_distance:.10f}\t{e.normalized:.10f}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_ced_csv(report: EvalReport, path) -> None:
    """Two-column CSV (threshold, fraction) for external CED plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fraction"])
        for t, f in report.ced:
            writer.writerow([f"{t:.10f}", f"{f:.10f}"])
