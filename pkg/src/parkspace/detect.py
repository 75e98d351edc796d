"""Turn accumulators into scored rotated-rectangle detections and suppress duplicates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

from . import jsonfmt
from .accumulate import Accumulator, AccumulatorSet, PipelineConfig, accumulate
from .errors import EmptyDay, ParseError
from .geometry import RotatedRect, min_area_rect, rect_to_polygon, rotated_iou
from .mask import FrameGrid, FrameObservation, boundary_corner_points


@dataclass(frozen=True)
class Detection:
    rect: RotatedRect
    posterior: float
    source_pixels: int
    merged_mask_count: int

    def __post_init__(self):
        if not 0.0 <= self.posterior <= 1.0:
            raise ValueError(f"posterior out of range: {self.posterior}")

    def to_dict(self) -> dict:
        r = self.rect
        return {
            "rect": {"cx": r.cx, "cy": r.cy, "w": r.w, "h": r.h, "angle_deg": r.angle_deg},
            "posterior": float(self.posterior),
            "source_pixels": int(self.source_pixels),
            "merged_mask_count": int(self.merged_mask_count),
        }


def sort_detections(dets: Iterable[Detection]) -> List[Detection]:
    """Posterior descending, then larger area; stable so input order breaks the rest."""
    return sorted(dets, key=lambda d: (-d.posterior, -d.rect.area))


@dataclass(frozen=True)
class DetectionSet:
    detections: Tuple[Detection, ...]
    grid: FrameGrid
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        object.__setattr__(self, "detections", tuple(self.detections))

    def __len__(self) -> int:
        return len(self.detections)

    def __iter__(self):
        return iter(self.detections)

    def to_dict(self) -> dict:
        return {
            "grid": {"width": self.grid.width, "height": self.grid.height},
            "config": self.config.to_dict(),
            "detections": [d.to_dict() for d in self.detections],
        }

    def to_json(self) -> str:
        return jsonfmt.dumps(self.to_dict())


def accumulator_posterior(acc: Accumulator, frames_ingested: int) -> float:
    """Mean count over the support divided by the day's frame count, capped at 1.

    Overlapping masks within a frame can push the mean count past the number
    of frames, hence the cap.
    """
    mean_count = acc.total / acc.support_size
    return min(1.0, mean_count / frames_ingested)


def accumulator_rect(acc: Accumulator) -> RotatedRect:
    return min_area_rect(boundary_corner_points(acc.x0, acc.y0, acc.counts > 0))


def extract_detections(acc_set: AccumulatorSet) -> List[Detection]:
    """One detection per accumulator, in accumulator insertion order."""
    if acc_set.frames_ingested == 0:
        raise EmptyDay("no frames were ingested")
    if not acc_set.entries:
        raise EmptyDay("no masks were ingested")
    out = []
    for acc in acc_set.entries:
        out.append(Detection(
            rect=accumulator_rect(acc),
            posterior=accumulator_posterior(acc, acc_set.frames_ingested),
            source_pixels=acc.support_size,
            merged_mask_count=acc.merged_mask_count,
        ))
    return out


def nms(dets: Sequence[Detection], t_nms: float, grid: FrameGrid = None,
        config: PipelineConfig = None) -> DetectionSet:
    """Greedy suppression: keep a detection iff its IoU with every kept one is < t_nms."""
    kept: List[Detection] = []
    kept_polys = []
    for det in sort_detections(dets):
        poly = rect_to_polygon(det.rect)
        if all(rotated_iou(poly, other) < t_nms for other in kept_polys):
            kept.append(det)
            kept_polys.append(poly)
    if config is None:
        config = PipelineConfig(t_nms=t_nms)
    if grid is None:
        grid = FrameGrid(1, 1)
    return DetectionSet(tuple(kept), grid, config)


def detect_from_accumulators(acc_set: AccumulatorSet, config: PipelineConfig) -> DetectionSet:
    if acc_set.frames_ingested == 0:
        raise EmptyDay("no frames were ingested")
    dets = extract_detections(acc_set) if acc_set.entries else []
    dets = [d for d in dets if d.posterior >= config.min_posterior]
    return nms(dets, config.t_nms, grid=acc_set.grid, config=config)


def run_pipeline(frames: Iterable[FrameObservation], config: PipelineConfig = None) -> DetectionSet:
    """Accumulate every frame in order, extract, filter by posterior, suppress."""
    config = config or PipelineConfig()
    frames = list(frames)
    if not frames:
        raise EmptyDay("frame sequence is empty")
    acc_set = accumulate(frames, config.t_sum)
    return detect_from_accumulators(acc_set, config)


# -- detection files ----------------------------------------------------------

def _number(obj, key, where):
    v = obj.get(key) if isinstance(obj, dict) else None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError("must be a number", field=f"{where}{key}")
    return v


def detection_set_from_dict(doc: dict) -> DetectionSet:
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object")
    for key in ("grid", "config", "detections"):
        if key not in doc:
            raise ParseError("missing field", field=key)
    grid_doc = doc["grid"]
    try:
        grid = FrameGrid(int(_number(grid_doc, "width", "grid.")), int(_number(grid_doc, "height", "grid.")))
        cfg = doc["config"]
        config = PipelineConfig(
            _number(cfg, "t_sum", "config."), _number(cfg, "t_nms", "config."),
            _number(cfg, "min_posterior", "config."),
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc), field="grid/config") from None
    if not isinstance(doc["detections"], list):
        raise ParseError("must be an array", field="detections")
    dets = []
    for i, d in enumerate(doc["detections"]):
        where = f"detections[{i}]."
        r = d.get("rect") if isinstance(d, dict) else None
        try:
            rect = RotatedRect(*(_number(r, k, where + "rect.") for k in ("cx", "cy", "w", "h", "angle_deg")))
            dets.append(Detection(
                rect,
                float(_number(d, "posterior", where)),
                int(_number(d, "source_pixels", where)),
                int(_number(d, "merged_mask_count", where)),
            ))
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), field=f"detections[{i}]") from None
    return DetectionSet(tuple(sort_detections(dets)), grid, config)


def read_detections(path) -> DetectionSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno) from None
    return detection_set_from_dict(doc)
