"""
Where occurrence-based detection goes wrong
===========================================

The method only sees where cars stand, not where spaces are painted. Three
consequences, each reproduced with the simulator:

* a car parked outside any space for long enough becomes a detection;
* a space nobody uses is never found;
* traffic leaves faint tracks that need a posterior cut-off.
"""

from parkspace import PipelineConfig, accumulate, evaluate, generate, preset
from parkspace.detect import detect_from_accumulators, extract_detections

FILTER = PipelineConfig(min_posterior=0.1)


def run(name, **overrides):
    scn = generate(preset(name, **overrides))
    acc = accumulate(scn.frames, 0.5, grid=scn.grid)
    return scn, acc


# %%
# Illegal parking: three cars on the curb for most of the day.
for name in ("dense-lot", "illegal-parking"):
    scn, acc = run(name)
    rec = evaluate(detect_from_accumulators(acc, FILTER), scn.gts).record(0.25)
    print(f"{name:16s} tp={rec.tp} fp={rec.fp} AP25={rec.ap:.3f}")

# %%
# Unused spaces show up as misses whatever the threshold.
scn, acc = run("dense-lot", unused_space_ids=["A03", "C06"])
rec = evaluate(detect_from_accumulators(acc, FILTER), scn.gts).record(0.25)
print(f"two unused spaces: fn={rec.fn}")

# %%
# Traffic alone: every accumulator stays well under the cut-off. Note that
# cars passing at random still stack up, since an accumulator lives all day
# and keeps catching later cars that land on it.
scn, acc = run("traffic-only")
post = sorted(d.posterior for d in extract_detections(acc))
print(f"{len(post)} traffic accumulators, posteriors {post[0]:.3f} .. {post[-1]:.3f}")
print("after filtering:", len(detect_from_accumulators(acc, FILTER)), "detections")
