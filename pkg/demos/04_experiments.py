#!/usr/bin/env python
# Small versions of the pairwise sweep, the k-segment chains and usability.

# %%
from seglink.experiments import (GRID_WALK, K_SEGMENT, PAIRWISE, ExperimentSpec, LinkCache,
                                 link_stats, run_k_segment_experiment,
                                 run_multi_segment_usability, run_pairwise_sweep,
                                 synthesize_segments)
from seglink.level import load_config
from seglink.linking import GameModels

models = GameModels.train(load_config("mario"))
segs = synthesize_segments(models, 30, seed=0)

# %%
# Sweep neighboring segments in the behavior grid with and without linking.
spec = ExperimentSpec("mario", PAIRWISE, ("null", "shortest", "bc_match"), max_pairs=60)
report = run_pairwise_sweep(spec, models, segs)
print("pairing:", report.extra["pairing"])
for s, row in report.summary.items():
    print(f"{s:10s} completable {row['completable']:.2f} usable {row['usable']:.2f}")

# %%
# Linker length and behavior drift.
for s, st in link_stats(report.rows).items():
    print(s, "median length", st["length"]["median"], "mean d_bc", round(st["d_bc"]["mean"], 4))

# %%
# Random three-segment levels.
spec = ExperimentSpec("mario", K_SEGMENT, ("null", "shortest"), k=3, trials=30, seed=1)
for s, row in run_k_segment_experiment(spec, models, segs).summary.items():
    print(s, "usable", round(row["usable"], 2))

# %%
# Grid walks reuse the pairwise links, so longer walks cost little extra.
cache = LinkCache(models, segs)
for k in (2, 3, 4):
    spec = ExperimentSpec("mario", GRID_WALK, ("shortest",), k=k, trials=30)
    print(k, run_multi_segment_usability(spec, models, segs, cache).summary["plain"]["usable"])
