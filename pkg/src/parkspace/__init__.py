"""Parking-space detection from vehicle occurrence heat maps."""

__version__ = "0.1.0"

from .accumulate import AccumulatorSet, PipelineConfig, accumulate
from .detect import Detection, DetectionSet, extract_detections, nms, run_pipeline
from .evaluate import EvalReport, GroundTruthSpace, average_precision, evaluate, match_detections
from .geometry import (
    Aabb,
    ConvexPolygon,
    RotatedRect,
    aabb_iou,
    clip_convex,
    convex_hull,
    min_area_rect,
    rect_to_polygon,
    rotated_iou,
)
from .mask import FrameGrid, FrameObservation, Mask, mask_area, mask_bbox, mask_corner_points
from .render import render_heatmap, render_overlay
from .simulate import ScenarioConfig, generate, preset, rasterize_rect
