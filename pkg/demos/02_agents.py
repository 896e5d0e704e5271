#!/usr/bin/env python
# The three completability agents.

# %%
from pathlib import Path

from seglink import agents
from seglink.level import COLUMNS, SliceSequence, load_config, pad_level
from seglink.render import render_svg, render_text

mario = load_config("mario")
ground = "-" * 12 + "XX"
gap = "-" * 14

# %%
# A two-column gap is an easy jump; a wide one is not.
for width in (2, 6):
    level = pad_level(SliceSequence(COLUMNS, (ground,) * 3 + (gap,) * width + (ground,) * 3),
                      mario)
    res = agents.check(level, mario)
    print(f"gap {width}: completable={res.completable} "
          f"progress={res.furthest_progress:.2f} nodes={res.nodes_expanded}")

# %%
# The witness path can be drawn over the level.
level = pad_level(SliceSequence(COLUMNS, (ground,) * 3 + (gap,) * 2 + (ground,) * 3), mario)
res = agents.check(level, mario)
pad = (len(mario.padding_start), len(mario.padding_end))
Path("out").mkdir(exist_ok=True)
Path("out/jump.svg").write_text(render_svg(level, mario, (), res.path, pad))
print("wrote out/jump.svg with", len(res.path), "path states")

# %%
# DungeonGrams: every step costs stamina and food refills it.  A long corridor
# is only passable when food sits along the way.
dg = load_config("dungeongrams")
plain = "X--------X"
fed = "X---&----X"
for name, mid in (("no food", (plain,) * 50), ("food", (plain,) * 25 + (fed,) + (plain,) * 24)):
    level = pad_level(SliceSequence(COLUMNS, mid), dg)
    res = agents.check(level, dg)
    print(f"{name}: completable={res.completable} progress={res.furthest_progress:.2f}")

# %%
# quick_check gives the same flag faster, for callers that ignore the path.
print(agents.quick_check(level, dg).completable)
print(render_text(level[:12]))
