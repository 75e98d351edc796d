"""Inspection artifacts: a grayscale heat map (dark is hot) and a TP/FP/FN overlay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import jsonfmt
from .accumulate import AccumulatorSet
from .errors import EmptyDay
from .evaluate import GroundTruthSpace, match_detections
from .geometry import rect_to_polygon
from .mask import FrameGrid


@dataclass(frozen=True)
class HeatmapImage:
    grid: FrameGrid
    intensities: bytes

    def __post_init__(self):
        if len(self.intensities) != self.grid.size:
            raise ValueError("intensity buffer does not match the grid")

    def as_array(self) -> np.ndarray:
        return np.frombuffer(self.intensities, dtype=np.uint8).reshape(self.grid.height, self.grid.width)

    def to_pgm(self) -> bytes:
        header = f"P5\n{self.grid.width} {self.grid.height}\n255\n".encode("ascii")
        return header + self.intensities


def scale_counts(counts: np.ndarray) -> np.ndarray:
    """floor(255 * (1 - c / max)) in exact integer arithmetic; 0 -> 255, max -> 0."""
    counts = np.asarray(counts, dtype=np.int64)
    peak = int(counts.max())
    if peak <= 0:
        raise EmptyDay("heat map has no counts")
    return ((255 * (peak - counts)) // peak).astype(np.uint8)


def render_heatmap(acc_set: AccumulatorSet) -> HeatmapImage:
    """Sum every accumulator into one frame-sized map and scale it to bytes."""
    if not acc_set.entries:
        raise EmptyDay("no accumulators to render")
    img = scale_counts(acc_set.dense_total())
    return HeatmapImage(acc_set.grid, img.tobytes())


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) < 4:
        raise ValueError("not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def render_overlay(dets, gts: Sequence[GroundTruthSpace], iou_threshold: float) -> dict:
    """Vector overlay: every detection labelled tp/fp, every unmatched space as fn."""
    entries = []
    matched = set()
    for m in match_detections(list(dets), gts, iou_threshold):
        r = m.detection.rect
        entry = {
            "kind": "tp" if m.is_tp else "fp",
            "shape": {
                "rect": {"cx": r.cx, "cy": r.cy, "w": r.w, "h": r.h, "angle_deg": r.angle_deg},
                "polygon": [[x, y] for x, y in rect_to_polygon(r).vertices],
            },
            "posterior": float(m.detection.posterior),
        }
        if m.is_tp:
            entry["gt_id"] = m.gt_id
            matched.add(m.gt_id)
        entries.append(entry)
    for g in gts:
        if g.id not in matched:
            entries.append({
                "kind": "fn",
                "shape": {"polygon": [[x, y] for x, y in g.shape.vertices]},
                "gt_id": g.id,
            })
    return {"iou_threshold": float(iou_threshold), "entries": entries}


def overlay_json(doc: dict) -> str:
    return jsonfmt.dumps(doc)
