"""Heat-map accumulation: merge each car mask into the best-matching region.

Every incoming mask is compared (bounding-box IoU) against the support box of
each existing accumulator. If the best match reaches ``t_sum`` the mask is
added pixel-wise into that accumulator, otherwise it starts a new one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, GridMismatch
from .geometry import Aabb
from .mask import FrameGrid, FrameObservation, Mask, mask_bbox


@dataclass(frozen=True)
class PipelineConfig:
    t_sum: float = 0.5
    t_nms: float = 0.4
    min_posterior: float = 0.0

    def __post_init__(self):
        for name in ("t_sum", "t_nms", "min_posterior"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(name, f"must be a number, got {value!r}")
            if not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"must lie in [0, 1], got {value}")
            object.__setattr__(self, name, float(value))

    def to_dict(self) -> dict:
        return {"t_sum": self.t_sum, "t_nms": self.t_nms, "min_posterior": self.min_posterior}


class Accumulator:
    """Integer heat map over one region.

    Counts are stored in a window spanning exactly the support bounding box;
    pixels outside the window are implicitly zero. Since counts only grow, the
    support is the union of the merged masks and its box is the union of
    their boxes.
    """

    def __init__(self, mask: Mask):
        self.grid = mask.grid
        x0, y0, arr = mask.crop
        self.x0, self.y0 = x0, y0
        self.counts = arr.astype(np.int32)
        self.merged_mask_count = 1

    @property
    def support_bbox(self) -> Aabb:
        h, w = self.counts.shape
        return Aabb(self.x0, self.y0, self.x0 + w, self.y0 + h)

    def add(self, mask: Mask) -> None:
        mx, my, marr = mask.crop
        mh, mw = marr.shape
        h, w = self.counts.shape
        nx0, ny0 = min(self.x0, mx), min(self.y0, my)
        nx1, ny1 = max(self.x0 + w, mx + mw), max(self.y0 + h, my + mh)
        if (nx0, ny0, nx1, ny1) != (self.x0, self.y0, self.x0 + w, self.y0 + h):
            grown = np.zeros((ny1 - ny0, nx1 - nx0), dtype=np.int32)
            grown[self.y0 - ny0:self.y0 - ny0 + h, self.x0 - nx0:self.x0 - nx0 + w] = self.counts
            self.counts, self.x0, self.y0 = grown, nx0, ny0
        self.counts[my - self.y0:my - self.y0 + mh, mx - self.x0:mx - self.x0 + mw] += marr
        self.merged_mask_count += 1

    @property
    def total(self) -> int:
        return int(self.counts.sum(dtype=np.int64))

    @property
    def support_size(self) -> int:
        return int(np.count_nonzero(self.counts))

    def pixel_counts(self) -> Dict[int, int]:
        """Sparse view: row-major pixel index -> count, nonzero entries only."""
        rows, cols = np.nonzero(self.counts)
        idx = (rows + self.y0) * self.grid.width + cols + self.x0
        return dict(zip(idx.tolist(), self.counts[rows, cols].tolist()))

    def dense(self) -> np.ndarray:
        out = np.zeros((self.grid.height, self.grid.width), dtype=np.int64)
        h, w = self.counts.shape
        out[self.y0:self.y0 + h, self.x0:self.x0 + w] = self.counts
        return out


class AccumulatorSet:
    def __init__(self, grid: FrameGrid):
        self.grid = grid
        self.entries: List[Accumulator] = []
        self.frames_ingested = 0
        self._boxes: List[Tuple[float, float, float, float]] = []

    def __len__(self) -> int:
        return len(self.entries)

    def _check_grid(self, grid: FrameGrid) -> None:
        if grid != self.grid:
            raise GridMismatch(
                f"expected {self.grid.width}x{self.grid.height}, got {grid.width}x{grid.height}"
            )

    def argmax_iou(self, m: Mask) -> Tuple[Optional[int], float]:
        """Index of the entry whose support box best overlaps the mask box.

        Ties go to the earliest entry; an empty set gives ``(None, 0.0)``.
        """
        self._check_grid(m.grid)
        if not self.entries:
            return None, 0.0
        b = mask_bbox(m)
        boxes = np.asarray(self._boxes)
        iw = np.minimum(boxes[:, 2], b.max_x) - np.maximum(boxes[:, 0], b.min_x)
        ih = np.minimum(boxes[:, 3], b.max_y) - np.maximum(boxes[:, 1], b.min_y)
        inter = np.where((iw > 0) & (ih > 0), iw * ih, 0.0)
        areas = (boxes[:, 2] - boxes[:, 0]) * (boxes[:, 3] - boxes[:, 1])
        iou = inter / (areas + b.area - inter)
        i = int(np.argmax(iou))
        return i, float(iou[i])

    def ingest_mask(self, m: Mask, t_sum: float) -> int:
        """Merge or append one mask; returns the index of the receiving entry."""
        idx, iou = self.argmax_iou(m)
        if idx is not None and iou >= t_sum:
            acc = self.entries[idx]
            acc.add(m)
            bb = acc.support_bbox
            self._boxes[idx] = (bb.min_x, bb.min_y, bb.max_x, bb.max_y)
            return idx
        acc = Accumulator(m)
        bb = acc.support_bbox
        self.entries.append(acc)
        self._boxes.append((bb.min_x, bb.min_y, bb.max_x, bb.max_y))
        return len(self.entries) - 1

    def ingest_frame(self, frame: FrameObservation, t_sum: float) -> "AccumulatorSet":
        self._check_grid(frame.grid)
        for m in frame.masks:
            self.ingest_mask(m, t_sum)
        self.frames_ingested += 1
        return self

    def total_mass(self) -> int:
        return sum(acc.total for acc in self.entries)

    def dense_total(self) -> np.ndarray:
        out = np.zeros((self.grid.height, self.grid.width), dtype=np.int64)
        for acc in self.entries:
            h, w = acc.counts.shape
            out[acc.y0:acc.y0 + h, acc.x0:acc.x0 + w] += acc.counts
        return out


def argmax_iou(acc_set: AccumulatorSet, m: Mask) -> Tuple[Optional[int], float]:
    return acc_set.argmax_iou(m)


def ingest_frame(acc_set: AccumulatorSet, frame: FrameObservation, t_sum: float) -> AccumulatorSet:
    return acc_set.ingest_frame(frame, t_sum)


def accumulate(frames, t_sum: float = 0.5, grid: Optional[FrameGrid] = None) -> AccumulatorSet:
    """Run the merge loop over a whole frame sequence (any iterable)."""
    acc_set = None
    if grid is not None:
        acc_set = AccumulatorSet(grid)
    for frame in frames:
        if acc_set is None:
            acc_set = AccumulatorSet(frame.grid)
        acc_set.ingest_frame(frame, t_sum)
    if acc_set is None:
        raise ValueError("no frames and no grid given")
    return acc_set
