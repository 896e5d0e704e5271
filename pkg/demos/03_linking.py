#!/usr/bin/env python
# Linking two segments that do not fit together.

# %%
from pathlib import Path

from seglink.experiments import synthesize_segments
from seglink.level import load_config
from seglink.linking import BC_MATCH, NULL, SHORTEST, GameModels, LinkRequest, assemble, build_link
from seglink.render import render_svg, render_text

icarus = load_config("icarus")
models = GameModels.train(icarus)
segs = synthesize_segments(models, 12, seed=2)

# %%
# Try pairs until plain concatenation fails; Icarus breaks often because the
# jump between the two segments may be out of reach.
for a in segs:
    for b in segs:
        if a is not b and not build_link(LinkRequest(a.level, b.level, NULL), models).completable:
            break
    else:
        continue
    break
print("concatenation is not completable for", a.id, "->", b.id)

# %%
# The shortest strategy returns the first generable, unbroken, completable
# linker in order of length.  BC-match ranks candidates by how well the
# linker interpolates the two segments' behavior.
for strategy in (SHORTEST, BC_MATCH):
    r = build_link(LinkRequest(a.level, b.level, strategy), models)
    print(strategy, r.status, "length", len(r.full_linker), "rmse", r.rmse, "usable", r.usable)

# %%
r = build_link(LinkRequest(a.level, b.level, SHORTEST), models)
level, extents = assemble([a.level, b.level], [r], icarus)
print(render_text(level))
Path("out").mkdir(exist_ok=True)
Path("out/link.svg").write_text(render_svg(level, icarus, extents))
print("linker rows", extents, "drawn in out/link.svg")
