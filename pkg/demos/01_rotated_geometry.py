"""
Rotated rectangles, overlap and tight boxes
===========================================

Parking spaces are stored as rotated rectangles. This walks through the
three geometric tools the detector leans on: exact IoU between rotated
rectangles, convex hulls, and the smallest box around a point cloud.
"""

import numpy as np

from parkspace.geometry import RotatedRect, convex_hull, min_area_rect, rect_iou, rect_to_polygon

# %%
# A rectangle is centre, width, height and an angle in degrees. Width is
# always the long side, so a tall box gets turned by 90 degrees on the way in.
tall = RotatedRect(100, 100, 20, 60, 0)
print(tall)
print(rect_to_polygon(tall).vertices)

# %%
# IoU is computed by clipping one polygon against the other, so the same
# box rotated by 45 degrees about its own centre gives the overlap of a
# square with its diamond.
square = RotatedRect(0, 0, 10, 10, 0)
diamond = RotatedRect(0, 0, 10, 10, 45)
print("square vs diamond:", round(rect_iou(square, diamond), 6))
print("shifted by half a width:", rect_iou(square, RotatedRect(5, 0, 10, 10, 0)))

# %%
# The tightest rectangle around a cloud of points. A stretched, rotated
# Gaussian blob should come back roughly aligned with its long axis.
rng = np.random.default_rng(0)
theta = np.radians(25)
rot = np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])
pts = rng.normal(0, 1, (200, 2)) * [30, 6] @ rot + [320, 240]
pts = [tuple(p) for p in pts]

hull = convex_hull(pts)
box = min_area_rect(pts)
print(f"{len(hull.vertices)} hull vertices")
print(f"box {box.w:.1f} x {box.h:.1f} at {box.angle_deg:.1f} deg")
