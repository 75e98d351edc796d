"""Reference computations that share no code path with the package.

Each one is deliberately naive: sampling, exhaustive grids, dense matrices,
straight-line loops.
"""

from __future__ import annotations

import math

import numpy as np


def rect_contains(rect, px, py):
    """Point-in-rect via the rect's own local frame (no polygon clipping)."""
    t = math.radians(rect.angle_deg)
    dx, dy = px - rect.cx, py - rect.cy
    lu = dx * math.cos(t) + dy * math.sin(t)
    lv = -dx * math.sin(t) + dy * math.cos(t)
    return (np.abs(lu) <= rect.w / 2) & (np.abs(lv) <= rect.h / 2)


def rect_extent(rect):
    t = math.radians(rect.angle_deg)
    ex = abs(rect.w / 2 * math.cos(t)) + abs(rect.h / 2 * math.sin(t))
    ey = abs(rect.w / 2 * math.sin(t)) + abs(rect.h / 2 * math.cos(t))
    return rect.cx - ex, rect.cy - ey, rect.cx + ex, rect.cy + ey


def monte_carlo_iou(a, b, samples, rng):
    """IoU estimate from uniform samples over the bounding box of the union."""
    ea, eb = rect_extent(a), rect_extent(b)
    x0, y0 = min(ea[0], eb[0]), min(ea[1], eb[1])
    x1, y1 = max(ea[2], eb[2]), max(ea[3], eb[3])
    px = rng.uniform(x0, x1, samples)
    py = rng.uniform(y0, y1, samples)
    ina, inb = rect_contains(a, px, py), rect_contains(b, px, py)
    union = np.count_nonzero(ina | inb)
    return np.count_nonzero(ina & inb) / union if union else 0.0


def monte_carlo_area(inside, box, samples, rng, chunk=1_000_000):
    x0, y0, x1, y1 = box
    hits = 0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        px = rng.uniform(x0, x1, n)
        py = rng.uniform(y0, y1, n)
        hits += np.count_nonzero(inside(px, py))
        done += n
    return hits / samples * (x1 - x0) * (y1 - y0)


def grid_min_box_area(points, step_deg=1.0):
    """Smallest enclosing oriented box over orientations 0, step, ..., < 180."""
    pts = np.asarray(points, dtype=float)
    best = math.inf
    for k in range(int(round(180 / step_deg))):
        t = math.radians(k * step_deg)
        u = pts @ np.array([math.cos(t), math.sin(t)])
        v = pts @ np.array([-math.sin(t), math.cos(t)])
        best = min(best, (u.max() - u.min()) * (v.max() - v.min()))
    return best


def dense_box_iou(a, b):
    ax0, ay0, ax1, ay1 = a
    bx0, by0, bx1, by1 = b
    iw = max(0, min(ax1, bx1) - max(ax0, bx0))
    ih = max(0, min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union if union else 0.0


def dense_box(matrix):
    rows, cols = np.nonzero(matrix)
    return cols.min(), rows.min(), cols.max() + 1, rows.max() + 1


def dense_heatmaps(frames_as_bitmaps, t_sum):
    """Replay of the merge loop with one full-frame matrix per region.

    ``frames_as_bitmaps`` is a list of frames, each a list of HxW bool arrays.
    Returns a list of (matrix, masks_merged).
    """
    regions = []
    for masks in frames_as_bitmaps:
        for m in masks:
            best, best_iou = None, -1.0
            mbox = dense_box(m)
            for i, (mat, _) in enumerate(regions):
                iou = dense_box_iou(mbox, dense_box(mat))
                if iou > best_iou:
                    best, best_iou = i, iou
            if best is not None and best_iou >= t_sum:
                mat, k = regions[best]
                regions[best] = (mat + m.astype(np.int64), k + 1)
            else:
                regions.append((m.astype(np.int64), 1))
    return regions


def dense_posterior(matrix, n_frames):
    return min(1.0, matrix.sum() / np.count_nonzero(matrix) / n_frames)


def brute_force_eval(iou, threshold):
    """Greedy highest-IoU matching and all-points AP, written as plain loops."""
    n_det = len(iou)
    n_gt = len(iou[0]) if n_det else 0
    taken = [False] * n_gt
    labels = []
    for i in range(n_det):
        best_j, best = None, -1.0
        for j in range(n_gt):
            if not taken[j] and iou[i][j] > best:
                best_j, best = j, iou[i][j]
        if best_j is not None and best >= threshold:
            taken[best_j] = True
            labels.append(True)
        else:
            labels.append(False)
    return labels


def brute_force_ap(labels, num_gt):
    # each true positive adds 1/num_gt of recall at the best precision reachable from its rank on
    precisions = []
    tp = 0
    for k, lab in enumerate(labels, start=1):
        tp += lab
        precisions.append(tp / k)
    ap = 0.0
    for k, lab in enumerate(labels):
        if lab:
            ap += max(precisions[k:]) / num_gt
    return ap
