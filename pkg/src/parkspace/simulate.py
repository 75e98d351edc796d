"""Synthetic parking-lot days with known ground truth.

A rectangular lot of ``rows x cols`` spaces is centred in the frame and
rotated by ``lot_angle_deg``. In the lot's own frame (before rotation) a curb
strip lies above the spaces and a road runs below them across the whole
frame::

    curb strip   (illegal parking slots)
    row A spaces
    ...
    last row
    road         (transient traffic)

Each space follows a two-state Markov chain. A parking event samples one
jittered, shrunk car rectangle that stays put until the car leaves. Traffic
cars land at fresh uniform positions on the road every frame. Illegal events
park a car in a curb slot for a contiguous span of frames.

All randomness comes from SplitMix64, so a seed reproduces the same files on
any platform. Occupancy, traffic and illegal parking each draw from their own
stream, seeded with the first SplitMix64 output of ``seed ^ tag``; switching
one phenomenon on or off leaves the others untouched. Draw order:

* occupancy, per frame, spaces in row-major order: one draw for the state
  transition (the stationary probability at frame 0), then dx, dy, dangle on
  a new arrival;
* traffic, per frame: x then y for each car;
* illegal, once: a Fisher-Yates shuffle of curb slots, then (span, start) per
  event.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Tuple

import numpy as np

from . import jsonfmt
from .errors import ConfigError, EmptyRaster, ParseError
from .evaluate import GroundTruthSpace, ground_truth_to_dict
from .geometry import RotatedRect, rect_to_polygon
from .mask import FrameGrid, FrameObservation, Mask, dumps_frames, mask_from_crop

FRAME_INTERVAL_S = 300
START_TIMESTAMP = 1_700_000_000
_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Steele, Lea and Flood's SplitMix64 generator."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def randbelow(self, n: int) -> int:
        return min(n - 1, int(self.random() * n))


STREAM_OCCUPANCY = 0x6F6363
STREAM_TRAFFIC = 0x747266
STREAM_ILLEGAL = 0x696C6C


def substream(seed: int, tag: int) -> SplitMix64:
    return SplitMix64(SplitMix64(seed ^ tag).next_u64())


@dataclass
class ScenarioConfig:
    width: int = 640
    height: int = 480
    rows: int = 3
    cols: int = 8
    space_w: float = 40.0
    space_h: float = 80.0
    lot_angle_deg: float = 10.0
    num_frames: int = 120
    occupancy_attach: float = 0.15
    occupancy_detach: float = 0.05
    jitter_px: float = 3.0
    jitter_angle_deg: float = 3.0
    car_shrink: float = 0.85
    traffic_per_frame: int = 2
    illegal_events: int = 0
    illegal_span_min: float = 0.6
    unused_space_ids: List[str] = field(default_factory=list)
    seed: int = 42

    @property
    def grid(self) -> FrameGrid:
        return FrameGrid(self.width, self.height)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config", "expected a JSON object")
        known = {f.name for f in fields(cls)}
        doc = dict(doc)
        if "grid" in doc:
            grid = doc.pop("grid")
            if not isinstance(grid, dict):
                raise ConfigError("grid", "expected an object with width and height")
            doc.setdefault("width", grid.get("width"))
            doc.setdefault("height", grid.get("height"))
        for key in doc:
            if key not in known:
                raise ConfigError(key, "unknown field")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["unused_space_ids"] = list(self.unused_space_ids)
        return d

    def validate(self) -> None:
        def is_int(v):
            return isinstance(v, int) and not isinstance(v, bool)

        def is_num(v):
            return (isinstance(v, (int, float)) and not isinstance(v, bool)
                    and math.isfinite(v))

        for name in ("width", "height", "rows", "cols", "num_frames"):
            v = getattr(self, name)
            if not is_int(v) or v < 1:
                raise ConfigError(name, f"must be an integer >= 1, got {v!r}")
        for name in ("traffic_per_frame", "illegal_events"):
            v = getattr(self, name)
            if not is_int(v) or v < 0:
                raise ConfigError(name, f"must be an integer >= 0, got {v!r}")
        if not is_int(self.seed) or not 0 <= self.seed <= _MASK64:
            raise ConfigError("seed", "must be an unsigned 64-bit integer")
        for name in ("space_w", "space_h", "lot_angle_deg", "jitter_px", "jitter_angle_deg",
                     "occupancy_attach", "occupancy_detach", "car_shrink", "illegal_span_min"):
            if not is_num(getattr(self, name)):
                raise ConfigError(name, "must be a finite number")
        if self.space_w <= 0 or self.space_h <= 0:
            raise ConfigError("space_w" if self.space_w <= 0 else "space_h", "must be > 0")
        for name in ("occupancy_attach", "occupancy_detach"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(name, "must lie in [0, 1]")
        if not 0.0 < self.car_shrink <= 1.0:
            raise ConfigError("car_shrink", "must lie in (0, 1]")
        if not 0.0 < self.illegal_span_min <= 1.0:
            raise ConfigError("illegal_span_min", "must lie in (0, 1]")
        if self.jitter_px < 0:
            raise ConfigError("jitter_px", "must be >= 0")
        if self.jitter_angle_deg < 0:
            raise ConfigError("jitter_angle_deg", "must be >= 0")
        if not isinstance(self.unused_space_ids, (list, tuple)) or not all(
                isinstance(s, str) for s in self.unused_space_ids):
            raise ConfigError("unused_space_ids", "must be a list of strings")
        ids = set(space_ids(self.rows, self.cols))
        for sid in self.unused_space_ids:
            if sid not in ids:
                raise ConfigError("unused_space_ids", f"unknown space id {sid!r}")
        layout = LotLayout(self)
        if self.illegal_events > len(layout.curb_slots):
            raise ConfigError("illegal_events",
                              f"at most {len(layout.curb_slots)} curb slots fit this lot")
        layout.check_fits()


PRESETS: Dict[str, dict] = {
    "dense-lot": {},
    "illegal-parking": {"illegal_events": 3},
    "traffic-only": {"occupancy_attach": 0.0, "occupancy_detach": 0.0},
    "single-space": {
        "rows": 1, "cols": 1, "occupancy_attach": 1.0, "occupancy_detach": 0.0,
        "jitter_px": 0.0, "jitter_angle_deg": 0.0, "car_shrink": 1.0, "traffic_per_frame": 0,
    },
}


def preset(name: str, **overrides) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    doc = {**PRESETS[name], **overrides}
    return ScenarioConfig.from_dict(doc)


def space_ids(rows: int, cols: int) -> List[str]:
    out = []
    for r in range(rows):
        prefix = chr(ord("A") + r) if r < 26 else f"R{r + 1}-"
        out.extend(f"{prefix}{c + 1:02d}" for c in range(cols))
    return out


class LotLayout:
    """Positions of spaces, road and curb in image coordinates."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.cx, self.cy = cfg.width / 2.0, cfg.height / 2.0
        t = math.radians(cfg.lot_angle_deg)
        self.cos, self.sin = math.cos(t), math.sin(t)
        self.lot_w = cfg.cols * cfg.space_w
        self.lot_h = cfg.rows * cfg.space_h
        short = min(cfg.space_w, cfg.space_h)
        self.gap = 0.25 * short
        self.lane_h = short
        # cars outside spaces lie with their long side along the lot x axis
        self.car_long = cfg.car_shrink * max(cfg.space_w, cfg.space_h)
        self.car_short = cfg.car_shrink * short
        self.road_y = self.lot_h / 2 + self.gap + self.lane_h / 2
        self.curb_y = -self.road_y
        pitch = self.car_long + self.gap
        n_slots = int((self.lot_w + self.gap) // pitch)
        first = -(n_slots - 1) * pitch / 2
        self.curb_slots = [first + k * pitch for k in range(n_slots)]

    def road_extent(self) -> Tuple[float, float]:
        """Range of lot-frame x for which a road car centre keeps the car inside the frame."""
        m = self.car_long / 2
        lo, hi = -math.inf, math.inf
        # image point = (cx - y*sin, cy + y*cos) + x*(cos, sin), each coordinate linear in x
        for base, slope, limit in (
            (self.cx - self.road_y * self.sin, self.cos, self.cfg.width),
            (self.cy + self.road_y * self.cos, self.sin, self.cfg.height),
        ):
            if abs(slope) < 1e-12:
                continue
            a, b = (m - base) / slope, (limit - m - base) / slope
            lo, hi = max(lo, min(a, b)), min(hi, max(a, b))
        return lo, hi

    def to_image(self, x: float, y: float) -> Tuple[float, float]:
        return (self.cx + x * self.cos - y * self.sin, self.cy + x * self.sin + y * self.cos)

    def space_center(self, r: int, c: int) -> Tuple[float, float]:
        cfg = self.cfg
        x = (c - (cfg.cols - 1) / 2) * cfg.space_w
        y = (r - (cfg.rows - 1) / 2) * cfg.space_h
        return self.to_image(x, y)

    def space_rect(self, r: int, c: int) -> RotatedRect:
        cx, cy = self.space_center(r, c)
        return RotatedRect(cx, cy, self.cfg.space_w, self.cfg.space_h, self.cfg.lot_angle_deg)

    def street_car(self, x: float, y: float) -> RotatedRect:
        cx, cy = self.to_image(x, y)
        return RotatedRect(cx, cy, self.car_long, self.car_short, self.cfg.lot_angle_deg)

    def check_fits(self) -> None:
        margin = self.cfg.jitter_px + 1.0
        half_w = self.lot_w / 2
        half_h = self.lot_h / 2 + self.gap + self.lane_h
        for sx in (-1, 1):
            for sy in (-1, 1):
                x, y = self.to_image(sx * half_w, sy * half_h)
                if not (margin <= x <= self.cfg.width - margin and margin <= y <= self.cfg.height - margin):
                    raise ConfigError("grid", "lot, road and curb do not fit inside the frame")


def rasterize_rect(rect: RotatedRect, grid: FrameGrid) -> Mask:
    """Pixels whose centres fall inside (or on) the rectangle, clipped to the grid."""
    poly = rect_to_polygon(rect)
    bb = poly.bbox()
    c0 = max(0, math.floor(bb.min_x - 0.5))
    c1 = min(grid.width - 1, math.ceil(bb.max_x - 0.5))
    r0 = max(0, math.floor(bb.min_y - 0.5))
    r1 = min(grid.height - 1, math.ceil(bb.max_y - 0.5))
    if c0 > c1 or r0 > r1:
        raise EmptyRaster("rectangle does not intersect the grid")
    xs = np.arange(c0, c1 + 1) + 0.5
    ys = np.arange(r0, r1 + 1) + 0.5
    px, py = np.meshgrid(xs, ys)
    inside = np.ones(px.shape, dtype=bool)
    verts = poly.vertices
    for i in range(4):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % 4]
        edge = math.hypot(bx - ax, by - ay)
        inside &= (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= -1e-9 * edge
    if not inside.any():
        raise EmptyRaster("no pixel centre falls inside the rectangle")
    return mask_from_crop(grid, c0, r0, inside)


@dataclass
class Scenario:
    config: ScenarioConfig
    gts: List[GroundTruthSpace]
    frames: List[FrameObservation]
    duty_cycle: Dict[str, float]
    # space id -> number of frames occupied; kept for exact checks
    occupied_frames: Dict[str, int] = field(default_factory=dict)
    illegal_spans: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def grid(self) -> FrameGrid:
        return self.config.grid

    def frames_jsonl(self) -> str:
        return dumps_frames(self.frames)

    def ground_truth_json(self) -> str:
        return jsonfmt.dumps(ground_truth_to_dict(self.grid, self.gts))

    def duty_cycles_json(self) -> str:
        return jsonfmt.dumps(dict(self.duty_cycle))


def generate(config: ScenarioConfig) -> Scenario:
    config.validate()
    cfg = config
    grid = cfg.grid
    layout = LotLayout(cfg)
    occ_rng = substream(cfg.seed, STREAM_OCCUPANCY)
    traffic_rng = substream(cfg.seed, STREAM_TRAFFIC)
    rng = substream(cfg.seed, STREAM_ILLEGAL)
    n = cfg.num_frames

    ids = space_ids(cfg.rows, cfg.cols)
    cells = [(r, c) for r in range(cfg.rows) for c in range(cfg.cols)]
    gts = [GroundTruthSpace(sid, rect_to_polygon(layout.space_rect(r, c))) for sid, (r, c) in zip(ids, cells)]
    unused = set(cfg.unused_space_ids)

    slots = list(range(len(layout.curb_slots)))
    for i in range(len(slots) - 1, 0, -1):
        j = rng.randbelow(i + 1)
        slots[i], slots[j] = slots[j], slots[i]
    min_span = max(1, math.ceil(cfg.illegal_span_min * n - 1e-9))
    illegal = []
    for e in range(cfg.illegal_events):
        span = min_span + rng.randbelow(n - min_span + 1)
        start = rng.randbelow(n - span + 1)
        rect = layout.street_car(layout.curb_slots[slots[e]], layout.curb_y)
        illegal.append((start, span, rasterize_rect(rect, grid)))

    denom = cfg.occupancy_attach + cfg.occupancy_detach
    p_start = cfg.occupancy_attach / denom if denom > 0 else 0.0
    occupied = [False] * len(cells)
    parked: List[Mask] = [None] * len(cells)
    counts = [0] * len(cells)
    road_lo, road_hi = layout.road_extent()
    road_dy = (layout.lane_h - layout.car_short) / 2

    frames = []
    for t in range(n):
        masks = []
        for k, (r, c) in enumerate(cells):
            if ids[k] in unused:
                continue
            arrived = False
            if t == 0:
                arrived = occupied[k] = occ_rng.random() < p_start
            elif occupied[k]:
                if occ_rng.random() < cfg.occupancy_detach:
                    occupied[k] = False
                    parked[k] = None
            elif occ_rng.random() < cfg.occupancy_attach:
                arrived = occupied[k] = True
            if arrived:
                dx = occ_rng.uniform(-cfg.jitter_px, cfg.jitter_px)
                dy = occ_rng.uniform(-cfg.jitter_px, cfg.jitter_px)
                da = occ_rng.uniform(-cfg.jitter_angle_deg, cfg.jitter_angle_deg)
                sx, sy = layout.space_center(r, c)
                car = RotatedRect(sx + dx, sy + dy, cfg.car_shrink * cfg.space_w,
                                  cfg.car_shrink * cfg.space_h, cfg.lot_angle_deg + da)
                parked[k] = rasterize_rect(car, grid)
            if occupied[k]:
                counts[k] += 1
                masks.append(parked[k])
        for start, span, m in illegal:
            if start <= t < start + span:
                masks.append(m)
        for _ in range(cfg.traffic_per_frame):
            x = traffic_rng.uniform(road_lo, road_hi)
            y = layout.road_y + traffic_rng.uniform(-road_dy, road_dy)
            masks.append(rasterize_rect(layout.street_car(x, y), grid))
        frames.append(FrameObservation(f"{t:05d}", START_TIMESTAMP + FRAME_INTERVAL_S * t, grid, tuple(masks)))

    duty = {sid: counts[k] / n for k, sid in enumerate(ids)}
    return Scenario(
        config=cfg, gts=gts, frames=frames, duty_cycle=duty,
        occupied_frames=dict(zip(ids, counts)),
        illegal_spans=[(s, sp) for s, sp, _ in illegal],
    )


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", exc.lineno) from None
    return ScenarioConfig.from_dict(doc)
