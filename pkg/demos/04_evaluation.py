"""
Scoring detections against ground truth
=======================================

Average precision on rotated shapes, at two IoU thresholds, and the
day-by-day summary (mean and sample standard deviation).
"""

import numpy as np

from parkspace.evaluate import aggregate_reports, average_precision, evaluate, evaluate_iou_matrix
from parkspace import PipelineConfig, accumulate, generate, preset
from parkspace.detect import detect_from_accumulators

# %%
# AP from ranked true/false labels. A false positive ranked first halves
# the precision available to the true positive behind it.
print(average_precision([True], 1), average_precision([False, True], 1),
      round(average_precision([True, False, True], 2), 4))

# %%
# The same via an IoU matrix (rows already in score order). The second
# detection overlaps the first space best, but it is taken.
iou = np.array([[0.9, 0.1], [0.6, 0.3]])
rep = evaluate_iou_matrix(iou, 2)
for rec in rep.records:
    print(rec.iou_threshold, "tp", rec.tp, "fp", rec.fp, "AP", round(rec.ap, 4))

# %%
# Five simulated days with heavier jitter, summarised per threshold.
reports = []
for seed in range(5):
    scn = generate(preset("dense-lot", seed=seed, jitter_px=6.0, jitter_angle_deg=6.0))
    acc = accumulate(scn.frames, 0.5, grid=scn.grid)
    reports.append(evaluate(detect_from_accumulators(acc, PipelineConfig(min_posterior=0.1)), scn.gts))
for row in aggregate_reports(reports)["thresholds"]:
    print(f"IoU {row['iou_threshold']}: AP {row['mean_ap']:.3f} +- {row['std_ap']:.3f} over {row['n']} days")
