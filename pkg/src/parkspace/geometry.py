"""Exact planar primitives: hulls, minimum-area rectangles, convex clipping, IoU.

Coordinates are image pixels (x right, y down). A polygon is "counter-clockwise"
when its shoelace signed area is positive, which on screen (y down) looks
clockwise. Every polygon in this package uses that orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateInput

Point = Tuple[float, float]

COLLINEAR_EPS = 1e-9
CONTAIN_TOL = 1e-6


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def signed_area(vertices: Sequence[Point]) -> float:
    """Shoelace signed area; positive for counter-clockwise order."""
    n = len(vertices)
    s = 0.0
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


@dataclass(frozen=True)
class Aabb:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if not (self.max_x >= self.min_x and self.max_y >= self.min_y):
            raise ValueError(f"invalid box {self}")

    @property
    def area(self) -> float:
        return (self.max_x - self.min_x) * (self.max_y - self.min_y)

    def union(self, other: "Aabb") -> "Aabb":
        return Aabb(
            min(self.min_x, other.min_x),
            min(self.min_y, other.min_y),
            max(self.max_x, other.max_x),
            max(self.max_y, other.max_y),
        )


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: Tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if not all(math.isfinite(c) for v in verts for c in v):
            raise ValueError("polygon vertices must be finite")
        for i in range(n):
            a, b, c = verts[i - 1], verts[i], verts[(i + 1) % n]
            if a == b:
                raise ValueError("duplicate consecutive vertices")
            la = math.hypot(b[0] - a[0], b[1] - a[1])
            lb = math.hypot(c[0] - b[0], c[1] - b[1])
            if _cross(a, b, c) < -COLLINEAR_EPS * la * lb:
                raise ValueError("polygon is not convex counter-clockwise")
        if signed_area(verts) <= 0:
            raise ValueError("polygon must have positive signed area")

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    def contains(self, p: Point, tol: float = CONTAIN_TOL) -> bool:
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            edge = math.hypot(b[0] - a[0], b[1] - a[1])
            if _cross(a, b, p) < -tol * edge:
                return False
        return True

    def bbox(self) -> Aabb:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return Aabb(min(xs), min(ys), max(xs), max(ys))


def _normalize_angle(angle: float) -> float:
    a = math.fmod(angle, 180.0)
    if a < 0:
        a += 180.0
    if a >= 180.0 - 1e-9 or abs(a) < 1e-12:
        a = 0.0
    return a


@dataclass(frozen=True)
class RotatedRect:
    """Center, size and orientation. Always stored with w >= h, angle in [0, 180)."""

    cx: float
    cy: float
    w: float
    h: float
    angle_deg: float = 0.0

    def __post_init__(self):
        vals = (self.cx, self.cy, self.w, self.h, self.angle_deg)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rect fields must be finite")
        if self.w <= 0 or self.h <= 0:
            raise ValueError("rect sides must be positive")
        w, h, angle = float(self.w), float(self.h), float(self.angle_deg)
        if w < h:
            w, h, angle = h, w, angle + 90.0
        object.__setattr__(self, "cx", float(self.cx))
        object.__setattr__(self, "cy", float(self.cy))
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "angle_deg", _normalize_angle(angle))

    @property
    def area(self) -> float:
        return self.w * self.h

    def translated(self, dx: float, dy: float) -> "RotatedRect":
        return RotatedRect(self.cx + dx, self.cy + dy, self.w, self.h, self.angle_deg)


def convex_hull(points: Iterable[Point]) -> ConvexPolygon:
    """Andrew's monotone chain. Collinear boundary points are dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) < 3:
        raise DegenerateInput(f"need at least 3 distinct points, got {len(pts)}")

    def half(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= COLLINEAR_EPS:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("points are collinear")
    return ConvexPolygon(tuple(hull))


def min_area_rect(points: Iterable[Point]) -> RotatedRect:
    """Minimum-area enclosing rectangle.

    The optimal rectangle has a side collinear with a hull edge, so every edge
    direction is tried and the smallest enclosing box wins (first one on ties).
    """
    hull = np.asarray(convex_hull(points).vertices)
    edges = np.roll(hull, -1, axis=0) - hull
    u = edges / np.hypot(edges[:, 0], edges[:, 1])[:, None]
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    pu = u @ hull.T  # (edges, vertices)
    pv = v @ hull.T
    umin, umax = pu.min(axis=1), pu.max(axis=1)
    vmin, vmax = pv.min(axis=1), pv.max(axis=1)
    areas = (umax - umin) * (vmax - vmin)
    best_area = areas.min()
    i = int(np.flatnonzero(areas <= best_area * (1 + 1e-12))[0])
    cu = 0.5 * (umin[i] + umax[i])
    cv = 0.5 * (vmin[i] + vmax[i])
    center = cu * u[i] + cv * v[i]
    angle = math.degrees(math.atan2(u[i, 1], u[i, 0]))
    return RotatedRect(
        float(center[0]), float(center[1]),
        float(umax[i] - umin[i]), float(vmax[i] - vmin[i]), angle,
    )


def rect_to_polygon(r: RotatedRect) -> ConvexPolygon:
    t = math.radians(r.angle_deg)
    ux, uy = math.cos(t), math.sin(t)
    vx, vy = -uy, ux
    hw, hh = r.w / 2.0, r.h / 2.0
    corners = []
    for su, sv in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        corners.append((r.cx + su * hw * ux + sv * hh * vx, r.cy + su * hw * uy + sv * hh * vy))
    return ConvexPolygon(tuple(corners))


def _cleanup(verts: list) -> list:
    # drop near-duplicate and collinear vertices left behind by clipping
    changed = True
    while changed and len(verts) >= 3:
        changed = False
        out = []
        n = len(verts)
        for i in range(n):
            a, b, c = verts[i - 1], verts[i], verts[(i + 1) % n]
            if math.hypot(b[0] - a[0], b[1] - a[1]) <= COLLINEAR_EPS:
                changed = True
                continue
            la = math.hypot(b[0] - a[0], b[1] - a[1])
            lc = math.hypot(c[0] - b[0], c[1] - b[1])
            if abs(_cross(a, b, c)) <= COLLINEAR_EPS * la * lc:
                changed = True
                continue
            out.append(b)
        verts = out
    return verts


def clip_convex(subject: ConvexPolygon, clip: ConvexPolygon) -> Optional[ConvexPolygon]:
    """Intersection of two convex polygons (Sutherland-Hodgman); None when empty."""
    out = list(subject.vertices)
    cv = clip.vertices
    for i in range(len(cv)):
        if not out:
            break
        a, b = cv[i], cv[(i + 1) % len(cv)]
        inp, out = out, []
        n = len(inp)
        for j in range(n):
            p, q = inp[j], inp[(j + 1) % n]
            dp, dq = _cross(a, b, p), _cross(a, b, q)
            if dp >= 0:
                out.append(p)
            if (dp >= 0) != (dq >= 0):
                t = dp / (dp - dq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    out = _cleanup(out)
    if len(out) < 3 or signed_area(out) <= 0:
        return None
    try:
        return ConvexPolygon(tuple(out))
    except ValueError:
        return None


def rotated_iou(a: ConvexPolygon, b: ConvexPolygon) -> float:
    # canonical operand order makes the result bitwise symmetric
    if b.vertices < a.vertices:
        a, b = b, a
    inter_poly = clip_convex(a, b)
    if inter_poly is None:
        return 0.0
    inter = inter_poly.area
    area_a, area_b = a.area, b.area
    union = area_a + area_b - inter
    if union <= 0:
        return 0.0
    return min(1.0, max(0.0, inter / union))


def rect_iou(a: RotatedRect, b: RotatedRect) -> float:
    return rotated_iou(rect_to_polygon(a), rect_to_polygon(b))


def aabb_iou(a: Aabb, b: Aabb) -> float:
    iw = min(a.max_x, b.max_x) - max(a.min_x, b.min_x)
    ih = min(a.max_y, b.max_y) - max(a.min_y, b.min_y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)
