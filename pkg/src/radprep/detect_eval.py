"""Detection and classification metrics: box IoU, greedy matching,
accuracy with Wald confidence intervals, ROC/AUC, and sensitivity at a
fixed false-positive rate.

Classification is binary (normal vs. abnormal) at the image level; an
image's abnormality score is the maximum box confidence, and an output
with no boxes counts as normal. Box matching is class-agnostic and a
placement counts as correct only for IoU strictly above the threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateBox,
    IdMismatch,
    IoFailure,
    NoInstances,
    OneClassOnly,
    SchemaError,
    UnknownImageId,
)

TUMOR_CLASSES = ("benign", "malignant")
Z_95 = 1.96


@dataclass(frozen=True)
class Box:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise DegenerateBox(f"box {self} has non-positive extent")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class GtBox:
    box: Box
    label: str


@dataclass(frozen=True)
class PredBox:
    box: Box
    label: str
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class GroundTruthImage:
    id: str
    label: str  # "normal" | "abnormal"
    boxes: tuple[GtBox, ...]

    def __post_init__(self):
        if self.label not in ("normal", "abnormal"):
            raise ValueError(f"label must be normal|abnormal, got {self.label!r}")
        if (self.label == "normal") != (len(self.boxes) == 0):
            raise ValueError("an image has boxes iff its label is abnormal")


@dataclass(frozen=True)
class PredictionImage:
    id: str
    boxes: tuple[PredBox, ...]


def box_iou(a: Box, b: Box) -> float:
    """Intersection area over union area; 0 when disjoint."""
    ix = min(a.x1, b.x1) - max(a.x0, b.x0)
    iy = min(a.y1, b.y1) - max(a.y0, b.y0)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


@dataclass(frozen=True)
class Match:
    gt_box: GtBox
    pred_box: PredBox | None
    iou: float


def match_detections(
    gt: GroundTruthImage, pred: PredictionImage, iou_thresh: float = 0.5
) -> list[Match]:
    """Greedily match predictions to ground-truth boxes, class-agnostic.

    Predictions are visited in descending score order (input order breaks
    ties); each claims the unclaimed ground-truth box with the highest IoU,
    provided that IoU is strictly above ``iou_thresh``. Returns one entry
    per ground-truth box, in their original order.
    """
    if gt.id != pred.id:
        raise IdMismatch(f"ground truth {gt.id!r} vs prediction {pred.id!r}")
    order = sorted(range(len(pred.boxes)), key=lambda i: -pred.boxes[i].score)
    claimed: dict[int, tuple[PredBox, float]] = {}
    for i in order:
        pbox = pred.boxes[i]
        best_j, best_iou = None, iou_thresh
        for j, gbox in enumerate(gt.boxes):
            if j in claimed:
                continue
            iou = box_iou(pbox.box, gbox.box)
            if iou > best_iou:
                best_j, best_iou = j, iou
        if best_j is not None:
            claimed[best_j] = (pbox, best_iou)
    return [
        Match(gt_box=gbox, pred_box=claimed[j][0], iou=claimed[j][1])
        if j in claimed
        else Match(gt_box=gbox, pred_box=None, iou=0.0)
        for j, gbox in enumerate(gt.boxes)
    ]


def wald_ci(p_hat: float, n: int) -> tuple[float, float]:
    """Normal-approximation 95% binomial interval, clipped to [0, 1]."""
    margin = Z_95 * math.sqrt(p_hat * (1.0 - p_hat) / n)
    return max(0.0, p_hat - margin), min(1.0, p_hat + margin)


@dataclass(frozen=True)
class Accuracy:
    matched: int
    total: int
    fraction: float
    ci: tuple[float, float]


def detection_accuracy(matches: list[Match]) -> Accuracy:
    """Detected instances out of total instances, with a 95% Wald CI."""
    total = len(matches)
    if total == 0:
        raise NoInstances("no ground-truth boxes to score")
    matched = sum(1 for m in matches if m.pred_box is not None)
    fraction = matched / total
    return Accuracy(matched=matched, total=total, fraction=fraction, ci=wald_ci(fraction, total))


def image_score(pred: PredictionImage) -> float:
    """Image-level abnormality score: max box score, 0.0 with no boxes."""
    return max((b.score for b in pred.boxes), default=0.0)


@dataclass(frozen=True)
class RocPoint:
    fpr: float
    tpr: float
    threshold: float  # classify positive when score >= threshold; inf at (0,0)


def roc_curve(samples: list[tuple[float, bool]]) -> list[RocPoint]:
    """Threshold sweep over the distinct scores, descending, ties grouped.

    The curve always starts at (0, 0) and ends at (1, 1).
    """
    n_pos = sum(1 for _, positive in samples if positive)
    n_neg = len(samples) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnly(f"need both classes, got {n_pos} positive / {n_neg} negative")
    ordered = sorted(samples, key=lambda s: -s[0])
    points = [RocPoint(fpr=0.0, tpr=0.0, threshold=math.inf)]
    tp = fp = 0
    i = 0
    while i < len(ordered):
        score = ordered[i][0]
        while i < len(ordered) and ordered[i][0] == score:
            if ordered[i][1]:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append(RocPoint(fpr=fp / n_neg, tpr=tp / n_pos, threshold=score))
    return points


def auc(points: list[RocPoint]) -> float:
    """Trapezoidal area under the ROC curve.

    Because ties are grouped into single points, this equals the
    Mann-Whitney pair statistic (ties counted half).
    """
    total = 0.0
    for a, b in zip(points, points[1:]):
        total += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0
    return total


def sensitivity_at_fpr(
    points: list[RocPoint], target_fpr: float = 0.015
) -> tuple[float, float]:
    """Best TPR among curve points with FPR <= target; no interpolation.

    Returns ``(achieved_fpr, tpr)``; ties on TPR go to the smallest FPR.
    The (0, 0) point always qualifies.
    """
    eligible = [p for p in points if p.fpr <= target_fpr]
    best = max(eligible, key=lambda p: (p.tpr, -p.fpr))
    return best.fpr, best.tpr


# ---------------------------------------------------------------------------
# file-level evaluation


@dataclass(frozen=True)
class EvalReport:
    auc: float
    roc_points: tuple[RocPoint, ...]
    target_fpr: float
    achieved_fpr: float
    tpr: float
    accuracy: Accuracy
    iou_mean: float | None
    iou_std: float | None

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "roc_points": [
                {
                    "fpr": p.fpr,
                    "tpr": p.tpr,
                    "threshold": None if math.isinf(p.threshold) else p.threshold,
                }
                for p in self.roc_points
            ],
            "sensitivity_at_fpr": {
                "target_fpr": self.target_fpr,
                "achieved_fpr": self.achieved_fpr,
                "tpr": self.tpr,
            },
            "accuracy": {
                "matched": self.accuracy.matched,
                "total": self.accuracy.total,
                "fraction": self.accuracy.fraction,
                "ci": [self.accuracy.ci[0], self.accuracy.ci[1]],
            },
            "iou_mean": self.iou_mean,
            "iou_std": self.iou_std,
        }


def _require(condition: bool, message: str):
    if not condition:
        raise SchemaError(message)


def _parse_box(entry: dict, path: str) -> Box:
    for key in ("x0", "y0", "x1", "y1"):
        _require(key in entry, f"{path}: box missing {key!r}")
        _require(isinstance(entry[key], (int, float)), f"{path}: box {key} not a number")
    try:
        return Box(float(entry["x0"]), float(entry["y0"]), float(entry["x1"]), float(entry["y1"]))
    except DegenerateBox as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _load_json(path) -> dict:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
    _require(isinstance(data, dict) and isinstance(data.get("images"), list),
             f"{path}: expected an object with an 'images' list")
    return data


def load_ground_truth(path) -> list[GroundTruthImage]:
    data = _load_json(path)
    images = []
    for idx, entry in enumerate(data["images"]):
        where = f"{path}: images[{idx}]"
        _require(isinstance(entry, dict), f"{where}: not an object")
        _require(isinstance(entry.get("id"), str), f"{where}: missing string 'id'")
        _require(entry.get("label") in ("normal", "abnormal"), f"{where}: bad label")
        boxes = []
        for bidx, bentry in enumerate(entry.get("boxes", [])):
            bwhere = f"{where}.boxes[{bidx}]"
            _require(isinstance(bentry, dict), f"{bwhere}: not an object")
            _require(bentry.get("class") in TUMOR_CLASSES, f"{bwhere}: bad class")
            boxes.append(GtBox(box=_parse_box(bentry, bwhere), label=bentry["class"]))
        try:
            images.append(GroundTruthImage(id=entry["id"], label=entry["label"], boxes=tuple(boxes)))
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from exc
    ids = [im.id for im in images]
    _require(len(set(ids)) == len(ids), f"{path}: duplicate image ids")
    return images


def load_predictions(path) -> list[PredictionImage]:
    data = _load_json(path)
    images = []
    for idx, entry in enumerate(data["images"]):
        where = f"{path}: images[{idx}]"
        _require(isinstance(entry, dict), f"{where}: not an object")
        _require(isinstance(entry.get("id"), str), f"{where}: missing string 'id'")
        boxes = []
        for bidx, bentry in enumerate(entry.get("boxes", [])):
            bwhere = f"{where}.boxes[{bidx}]"
            _require(isinstance(bentry, dict), f"{bwhere}: not an object")
            _require(bentry.get("class") in TUMOR_CLASSES, f"{bwhere}: bad class")
            score = bentry.get("score")
            _require(isinstance(score, (int, float)) and 0.0 <= score <= 1.0,
                     f"{bwhere}: score must be a number in [0, 1]")
            boxes.append(PredBox(box=_parse_box(bentry, bwhere), label=bentry["class"],
                                 score=float(score)))
        images.append(PredictionImage(id=entry["id"], boxes=tuple(boxes)))
    ids = [im.id for im in images]
    _require(len(set(ids)) == len(ids), f"{path}: duplicate image ids")
    return images


def evaluate_records(
    gts: list[GroundTruthImage],
    preds: list[PredictionImage],
    iou_thresh: float = 0.5,
    target_fpr: float = 0.015,
) -> EvalReport:
    """Compute every report metric from parsed records.

    Images with no prediction entry count as "no boxes found" (normal).
    """
    by_id = {g.id: g for g in gts}
    pred_by_id: dict[str, PredictionImage] = {}
    for p in preds:
        if p.id not in by_id:
            raise UnknownImageId(f"prediction for unknown image {p.id!r}")
        pred_by_id[p.id] = p

    matches: list[Match] = []
    samples: list[tuple[float, bool]] = []
    for gt in gts:
        pred = pred_by_id.get(gt.id, PredictionImage(id=gt.id, boxes=()))
        samples.append((image_score(pred), gt.label == "abnormal"))
        if gt.boxes:
            matches.extend(match_detections(gt, pred, iou_thresh))

    points = roc_curve(samples)
    area = auc(points)
    achieved_fpr, tpr = sensitivity_at_fpr(points, target_fpr)
    accuracy = detection_accuracy(matches)
    matched_ious = np.array([m.iou for m in matches if m.pred_box is not None])
    if matched_ious.size:
        iou_mean = float(matched_ious.mean())
        iou_std = float(matched_ious.std(ddof=0))
    else:
        iou_mean = iou_std = None
    return EvalReport(
        auc=area,
        roc_points=tuple(points),
        target_fpr=target_fpr,
        achieved_fpr=achieved_fpr,
        tpr=tpr,
        accuracy=accuracy,
        iou_mean=iou_mean,
        iou_std=iou_std,
    )


def evaluate(gt_path, pred_path, iou_thresh: float = 0.5, target_fpr: float = 0.015) -> EvalReport:
    """Evaluate a predictions file against a ground-truth file."""
    return evaluate_records(
        load_ground_truth(gt_path), load_predictions(pred_path),
        iou_thresh=iou_thresh, target_fpr=target_fpr,
    )


def write_report_json(report: EvalReport, path) -> None:
    try:
        Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_roc_csv(points, path) -> None:
    """Export ROC points as ``fpr,tpr,threshold`` CSV."""
    lines = ["fpr,tpr,threshold"]
    lines += [f"{p.fpr},{p.tpr},{p.threshold}" for p in points]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
