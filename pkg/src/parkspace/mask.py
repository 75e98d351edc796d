"""Run-length encoded car masks and the JSON Lines frame-sequence format.

Runs are row-major over the whole frame (a run may wrap across rows), so every
bitmap has exactly one encoding. Pixels are unit squares: the pixel at
(col, row) covers [col, col+1] x [row, row+1].
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from .errors import ParseError
from .geometry import Aabb, Point


@dataclass(frozen=True)
class FrameGrid:
    width: int
    height: int

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.width}x{self.height}")

    @property
    def size(self) -> int:
        return self.width * self.height


@dataclass(frozen=True, eq=True)
class Mask:
    grid: FrameGrid
    runs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        runs = tuple((int(s), int(n)) for s, n in self.runs)
        object.__setattr__(self, "runs", runs)
        if not runs:
            raise ValueError("mask must cover at least one pixel")
        limit = self.grid.size
        prev_end = 0
        for start, length in runs:
            if length < 1:
                raise ValueError(f"run length must be >= 1, got {length}")
            if start < prev_end:
                raise ValueError("runs must be sorted and non-overlapping")
            prev_end = start + length
            if prev_end > limit:
                raise ValueError(f"run ({start}, {length}) exceeds grid of {limit} pixels")

    @classmethod
    def from_dense(cls, bitmap: np.ndarray) -> "Mask":
        bitmap = np.asarray(bitmap, dtype=bool)
        if bitmap.ndim != 2:
            raise ValueError("bitmap must be 2-D (rows, cols)")
        h, w = bitmap.shape
        flat = np.concatenate([[False], bitmap.ravel(), [False]]).astype(np.int8)
        edges = np.flatnonzero(np.diff(flat))
        starts, ends = edges[0::2], edges[1::2]
        return cls(FrameGrid(w, h), tuple(zip(starts.tolist(), (ends - starts).tolist())))

    @classmethod
    def from_flat(cls, grid: FrameGrid, flat: Sequence[int]) -> "Mask":
        if len(flat) % 2:
            raise ValueError("flat run list must have even length")
        return cls(grid, tuple(zip(flat[0::2], flat[1::2])))

    def flat_runs(self) -> List[int]:
        return [v for run in self.runs for v in run]

    def to_dense(self) -> np.ndarray:
        flat = np.zeros(self.grid.size, dtype=bool)
        for start, length in self.runs:
            flat[start:start + length] = True
        return flat.reshape(self.grid.height, self.grid.width)

    @cached_property
    def segments(self) -> np.ndarray:
        """(row, col_start, col_end) triples, one per row piece of each run."""
        w = self.grid.width
        out = []
        for start, length in self.runs:
            while length > 0:
                row, col = divmod(start, w)
                take = min(length, w - col)
                out.append((row, col, col + take))
                start += take
                length -= take
        return np.array(out, dtype=np.int64)

    @cached_property
    def crop(self) -> Tuple[int, int, np.ndarray]:
        """(x0, y0, bitmap) with the bitmap spanning exactly the bounding box."""
        seg = self.segments
        x0, x1 = int(seg[:, 1].min()), int(seg[:, 2].max())
        y0, y1 = int(seg[:, 0].min()), int(seg[:, 0].max()) + 1
        arr = np.zeros((y1 - y0, x1 - x0), dtype=bool)
        for r, c0, c1 in seg:
            arr[r - y0, c0 - x0:c1 - x0] = True
        return x0, y0, arr

    def translated(self, dx: int, dy: int) -> "Mask":
        out = []
        w = self.grid.width
        for r, c0, c1 in self.segments:
            r2, c2 = int(r) + dy, int(c0) + dx
            if not (0 <= r2 < self.grid.height and c2 >= 0 and c2 + (c1 - c0) <= w):
                raise ValueError("translated mask leaves the grid")
            out.append((r2 * w + c2, int(c1 - c0)))
        merged: list = []
        for s, n in sorted(out):
            if merged and merged[-1][0] + merged[-1][1] == s:
                merged[-1] = (merged[-1][0], merged[-1][1] + n)
            else:
                merged.append((s, n))
        return Mask(self.grid, tuple(merged))


def mask_from_crop(grid: FrameGrid, x0: int, y0: int, arr: np.ndarray) -> Mask:
    """Encode a bitmap window placed at (x0, y0) as a full-frame mask."""
    arr = np.asarray(arr, dtype=bool)
    padded = np.pad(arr, ((0, 0), (1, 1))).astype(np.int8)
    d = np.diff(padded, axis=1)
    sr, sc = np.nonzero(d == 1)
    er, ec = np.nonzero(d == -1)
    starts = (sr + y0) * grid.width + sc + x0
    lengths = ec - sc
    runs: list = []
    for s, n in zip(starts.tolist(), lengths.tolist()):
        if runs and runs[-1][0] + runs[-1][1] == s:
            runs[-1] = (runs[-1][0], runs[-1][1] + n)
        else:
            runs.append((s, n))
    return Mask(grid, tuple(runs))


def mask_area(m: Mask) -> int:
    return sum(length for _, length in m.runs)


def mask_bbox(m: Mask) -> Aabb:
    x0, y0, arr = m.crop
    return Aabb(x0, y0, x0 + arr.shape[1], y0 + arr.shape[0])


def boundary_corner_points(x0: int, y0: int, support: np.ndarray) -> List[Point]:
    """Unit-square corners of every 4-connected boundary pixel, deduplicated and sorted."""
    padded = np.pad(support, 1)
    interior = (
        support
        & padded[:-2, 1:-1] & padded[2:, 1:-1]
        & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    rows, cols = np.nonzero(support & ~interior)
    xs, ys = cols + x0, rows + y0
    corners = np.concatenate([
        np.stack([xs, ys], 1), np.stack([xs + 1, ys], 1),
        np.stack([xs + 1, ys + 1], 1), np.stack([xs, ys + 1], 1),
    ])
    corners = np.unique(corners, axis=0)
    return [(float(x), float(y)) for x, y in corners]


def mask_corner_points(m: Mask) -> List[Point]:
    x0, y0, arr = m.crop
    return boundary_corner_points(x0, y0, arr)


@dataclass(frozen=True)
class FrameObservation:
    frame_id: str
    timestamp: int
    grid: FrameGrid
    masks: Tuple[Mask, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "masks", tuple(self.masks))
        for m in self.masks:
            if m.grid != self.grid:
                raise ValueError("all masks must share the frame grid")


# -- JSON Lines frame-sequence files ------------------------------------------

_FRAME_KEYS = ("frame_id", "timestamp", "width", "height", "masks")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_frame_line(text: str, lineno: int) -> FrameObservation:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", lineno) from None
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object", lineno)
    for key in _FRAME_KEYS:
        if key not in obj:
            raise ParseError("missing field", lineno, key)
    for key in obj:
        if key not in _FRAME_KEYS:
            raise ParseError("unexpected field", lineno, key)
    if not isinstance(obj["frame_id"], str):
        raise ParseError("must be a string", lineno, "frame_id")
    for key in ("timestamp", "width", "height"):
        if not _is_int(obj[key]):
            raise ParseError("must be an integer", lineno, key)
    if obj["width"] < 1 or obj["height"] < 1:
        raise ParseError("must be >= 1", lineno, "width" if obj["width"] < 1 else "height")
    grid = FrameGrid(obj["width"], obj["height"])
    if not isinstance(obj["masks"], list):
        raise ParseError("must be an array", lineno, "masks")
    masks = []
    for i, entry in enumerate(obj["masks"]):
        name = f"masks[{i}].runs"
        if not isinstance(entry, dict) or set(entry) != {"runs"}:
            raise ParseError("mask must be an object with exactly 'runs'", lineno, f"masks[{i}]")
        runs = entry["runs"]
        if not isinstance(runs, list) or not all(_is_int(v) for v in runs):
            raise ParseError("must be an array of integers", lineno, name)
        if len(runs) == 0 or len(runs) % 2:
            raise ParseError("must be a non-empty array of even length", lineno, name)
        try:
            masks.append(Mask.from_flat(grid, runs))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, name) from None
    return FrameObservation(obj["frame_id"], obj["timestamp"], grid, tuple(masks))


def iter_frames(source: Union[str, Path, io.TextIOBase, Iterable[str]]) -> Iterator[FrameObservation]:
    """Parse a frame-sequence file lazily, checking grid and timestamp order."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from iter_frames(fh)
        return
    grid = None
    last_ts = None
    for lineno, raw in enumerate(source, start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip():
            raise ParseError("empty line", lineno)
        frame = parse_frame_line(line, lineno)
        if grid is None:
            grid = frame.grid
        elif frame.grid != grid:
            field_name = "width" if frame.grid.width != grid.width else "height"
            raise ParseError("grid differs from first line", lineno, field_name)
        if last_ts is not None and frame.timestamp < last_ts:
            raise ParseError("timestamps must be non-decreasing", lineno, "timestamp")
        last_ts = frame.timestamp
        yield frame


def read_frames(source) -> List[FrameObservation]:
    return list(iter_frames(source))


def frame_to_line(frame: FrameObservation) -> str:
    obj = {
        "frame_id": frame.frame_id,
        "timestamp": frame.timestamp,
        "width": frame.grid.width,
        "height": frame.grid.height,
        "masks": [{"runs": m.flat_runs()} for m in frame.masks],
    }
    return json.dumps(obj, separators=(",", ":"))


def dumps_frames(frames: Iterable[FrameObservation]) -> str:
    return "".join(frame_to_line(f) + "\n" for f in frames)
