"""
From a day of car masks to parking spaces
=========================================

A synthetic lot of 3 x 8 spaces is filmed every five minutes for ten hours.
Each frame lists one pixel mask per car. Stationary cars pile up into hot
regions; the detector turns each region into a rotated rectangle with a
score equal to the fraction of the day it was occupied.
"""

import numpy as np

from parkspace import PipelineConfig, accumulate, evaluate, generate, preset, render_heatmap
from parkspace.detect import detect_from_accumulators

# %%
# Generate the day. Duty cycles are measured from the generated frames.
scn = generate(preset("dense-lot", seed=42))
print(len(scn.frames), "frames,", sum(len(f.masks) for f in scn.frames), "masks")
print("duty cycles:", sorted(round(v, 2) for v in scn.duty_cycle.values()))

# %%
# Merge masks into accumulators. A mask joins the accumulator whose box it
# overlaps most, as long as that overlap reaches t_sum.
acc = accumulate(scn.frames, t_sum=0.5, grid=scn.grid)
print(len(acc), "accumulators")

# %%
# The heat map: dark means many cars were seen there.
img = render_heatmap(acc).as_array()
print("darkest pixel", img.min(), "share of frame touched", np.mean(img < 255).round(3))

# %%
# Detections with no filtering. Passing traffic leaves weak detections on the
# road; they rank below every real space so AP is unaffected, but they are
# false positives.
for min_posterior in (0.0, 0.1):
    dets = detect_from_accumulators(acc, PipelineConfig(min_posterior=min_posterior))
    rep = evaluate(dets, scn.gts)
    rec = rep.record(0.25)
    print(f"min_posterior={min_posterior}: {len(dets)} detections, tp={rec.tp} fp={rec.fp} "
          f"AP25={rep.ap(0.25):.3f} AP50={rep.ap(0.5):.3f}")

# %%
# Top of the list: long-occupied spaces with a posterior close to their duty cycle.
for d in list(dets)[:5]:
    r = d.rect
    print(f"({r.cx:6.1f}, {r.cy:6.1f}) {r.w:5.1f} x {r.h:5.1f} @ {r.angle_deg:5.1f}  p={d.posterior:.3f}")
