"""Average precision of rotated detections against ground-truth space polygons.

Matching is greedy in score order: each detection takes the still-unmatched
ground truth with the highest IoU and is a true positive iff that IoU reaches
the threshold. AP is the area under the precision/recall curve with precision
replaced by its running maximum from the right (all-points interpolation).
Nothing here counts true negatives.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import jsonfmt
from .detect import Detection, DetectionSet
from .errors import ParseError, ZeroGroundTruth
from .geometry import ConvexPolygon, rect_to_polygon, rotated_iou
from .mask import FrameGrid

DEFAULT_THRESHOLDS = (0.25, 0.5)


@dataclass(frozen=True)
class GroundTruthSpace:
    id: str
    shape: ConvexPolygon


@dataclass(frozen=True)
class Match:
    detection: Optional[Detection]
    is_tp: bool
    gt_id: Optional[str]


@dataclass(frozen=True)
class ThresholdRecord:
    iou_threshold: float
    ap: float
    tp: int
    fp: int
    fn: int
    pr_curve: Tuple[Tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {
            "iou_threshold": float(self.iou_threshold),
            "ap": float(self.ap),
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "pr_curve": [[float(r), float(p)] for r, p in self.pr_curve],
        }


@dataclass(frozen=True)
class EvalReport:
    num_gt: int
    records: Tuple[ThresholdRecord, ...]

    def record(self, threshold: float) -> ThresholdRecord:
        for rec in self.records:
            if abs(rec.iou_threshold - threshold) < 1e-12:
                return rec
        raise KeyError(threshold)

    def ap(self, threshold: float) -> float:
        return self.record(threshold).ap

    def to_dict(self) -> dict:
        return {"num_gt": self.num_gt, "records": [r.to_dict() for r in self.records]}

    def to_json(self) -> str:
        return jsonfmt.dumps(self.to_dict())


def iou_matrix(dets: Sequence[Detection], gts: Sequence[GroundTruthSpace]) -> np.ndarray:
    out = np.zeros((len(dets), len(gts)))
    for i, d in enumerate(dets):
        poly = rect_to_polygon(d.rect)
        for j, g in enumerate(gts):
            out[i, j] = rotated_iou(poly, g.shape)
    return out


def greedy_match(iou: np.ndarray, threshold: float) -> List[Tuple[bool, Optional[int]]]:
    """Per row (score order): (is_tp, matched column or None)."""
    iou = np.asarray(iou, dtype=float)
    n_det = iou.shape[0]
    n_gt = iou.shape[1] if iou.ndim == 2 else 0
    free = np.ones(n_gt, dtype=bool)
    out = []
    for i in range(n_det):
        if not free.any():
            out.append((False, None))
            continue
        row = np.where(free, iou[i], -np.inf)
        j = int(np.argmax(row))
        if row[j] >= threshold:
            free[j] = False
            out.append((True, j))
        else:
            out.append((False, None))
    return out


def match_detections(dets, gts: Sequence[GroundTruthSpace], iou_threshold: float) -> List[Match]:
    dets = list(dets)
    pairs = greedy_match(iou_matrix(dets, gts), iou_threshold)
    return [Match(d, tp, gts[j].id if j is not None else None) for d, (tp, j) in zip(dets, pairs)]


def precision_recall(labels: Sequence[bool], num_gt: int) -> Tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels, dtype=bool)
    tp = np.cumsum(labels)
    fp = np.cumsum(~labels)
    recall = tp / num_gt
    precision = tp / np.maximum(tp + fp, 1)
    return recall, precision


def average_precision(labels: Sequence[bool], num_gt: int) -> float:
    if num_gt <= 0:
        raise ZeroGroundTruth("average precision needs at least one ground-truth space")
    if len(labels) == 0:
        return 0.0
    # recall only moves at true positives, each by 1 / num_gt; summing the
    # envelope there first keeps a perfect ranking at exactly 1.0
    labels = np.asarray(labels, dtype=bool)
    _, precision = precision_recall(labels, num_gt)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    return float(np.sum(envelope[labels]) / num_gt)


def evaluate_iou_matrix(iou: np.ndarray, num_gt: int,
                        thresholds: Iterable[float] = DEFAULT_THRESHOLDS) -> EvalReport:
    """Evaluation on a precomputed IoU matrix whose rows are in score order."""
    if num_gt <= 0:
        raise ZeroGroundTruth("no ground-truth spaces")
    thresholds = list(thresholds)
    if not thresholds:
        raise ValueError("need at least one IoU threshold")
    records = []
    for thr in thresholds:
        if not 0.0 < thr <= 1.0:
            raise ValueError(f"IoU threshold must lie in (0, 1], got {thr}")
        labels = [tp for tp, _ in greedy_match(iou, thr)]
        tp = sum(labels)
        recall, precision = precision_recall(labels, num_gt)
        records.append(ThresholdRecord(
            iou_threshold=float(thr),
            ap=average_precision(labels, num_gt),
            tp=tp,
            fp=len(labels) - tp,
            fn=num_gt - tp,
            pr_curve=tuple(zip(recall.tolist(), precision.tolist())),
        ))
    return EvalReport(num_gt, tuple(records))


def evaluate(dets, gts: Sequence[GroundTruthSpace],
             thresholds: Iterable[float] = DEFAULT_THRESHOLDS) -> EvalReport:
    dets = list(dets)
    iou = iou_matrix(dets, gts).reshape(len(dets), len(gts))
    return evaluate_iou_matrix(iou, len(gts), thresholds)


def aggregate_reports(reports: Sequence[EvalReport]) -> dict:
    """Mean and sample standard deviation (n - 1) of AP per threshold, across days."""
    if not reports:
        raise ValueError("no reports to aggregate")
    thresholds = [r.iou_threshold for r in reports[0].records]
    out = []
    for thr in thresholds:
        aps = [rep.ap(thr) for rep in reports]
        std = statistics.stdev(aps) if len(aps) > 1 else 0.0
        out.append({"iou_threshold": float(thr), "mean_ap": float(statistics.fmean(aps)),
                    "std_ap": float(std), "n": len(aps)})
    return {"num_reports": len(reports), "thresholds": out}


# -- files --------------------------------------------------------------------

def ground_truth_to_dict(grid: FrameGrid, gts: Sequence[GroundTruthSpace]) -> dict:
    return {
        "width": grid.width,
        "height": grid.height,
        "spaces": [{"id": g.id, "polygon": [[x, y] for x, y in g.shape.vertices]} for g in gts],
    }


def ground_truth_from_dict(doc) -> Tuple[FrameGrid, List[GroundTruthSpace]]:
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object")
    for key in ("width", "height", "spaces"):
        if key not in doc:
            raise ParseError("missing field", field=key)
    w, h = doc["width"], doc["height"]
    if not all(isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in (w, h)):
        raise ParseError("width and height must be positive integers", field="width/height")
    grid = FrameGrid(w, h)
    if not isinstance(doc["spaces"], list):
        raise ParseError("must be an array", field="spaces")
    gts = []
    seen = set()
    for i, sp in enumerate(doc["spaces"]):
        where = f"spaces[{i}]"
        if not isinstance(sp, dict) or not isinstance(sp.get("id"), str):
            raise ParseError("space needs a string id", field=f"{where}.id")
        if sp["id"] in seen:
            raise ParseError(f"duplicate id {sp['id']!r}", field=f"{where}.id")
        seen.add(sp["id"])
        poly = sp.get("polygon")
        try:
            verts = tuple((float(x), float(y)) for x, y in poly)
            shape = ConvexPolygon(verts)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"invalid polygon ({exc})", field=f"{where}.polygon") from None
        bb = shape.bbox()
        tol = 1e-6
        if bb.min_x < -tol or bb.min_y < -tol or bb.max_x > w + tol or bb.max_y > h + tol:
            raise ParseError("polygon lies outside the grid", field=f"{where}.polygon")
        gts.append(GroundTruthSpace(sp["id"], shape))
    return grid, gts


def read_ground_truth(path) -> Tuple[FrameGrid, List[GroundTruthSpace]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno) from None
    return ground_truth_from_dict(doc)


def report_from_dict(doc) -> EvalReport:
    try:
        records = tuple(
            ThresholdRecord(
                float(r["iou_threshold"]), float(r["ap"]), int(r["tp"]), int(r["fp"]), int(r["fn"]),
                tuple((float(a), float(b)) for a, b in r["pr_curve"]),
            )
            for r in doc["records"]
        )
        return EvalReport(int(doc["num_gt"]), records)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed report ({exc})") from None


def read_report(path) -> EvalReport:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno) from None
    return report_from_dict(doc)
