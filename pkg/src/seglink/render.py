"""Text and SVG rendering of levels, with linker boxes and agent paths."""

from __future__ import annotations

from typing import Sequence

from .level import COLUMNS, GameConfig, SliceSequence, to_grid

CELL = 12

# fill colour by the first matching tag
TAG_COLORS = (
    ("door", "#8e44ad"),
    ("hazard", "#e74c3c"),
    ("enemy", "#c0392b"),
    ("food", "#27ae60"),
    ("switch", "#f1c40f"),
    ("portal", "#2980b9"),
    ("end-marker", "#2980b9"),
    ("start-marker", "#16a085"),
    ("pipe-part", "#2ecc71"),
    ("structure", "#d35400"),
    ("moving-platform", "#95a5a6"),
    ("passable-platform", "#bdc3c7"),
    ("solid", "#5d4037"),
)


def render_text(level: SliceSequence) -> str:
    return to_grid(level).to_text()


def tile_color(tile: str, config: GameConfig) -> str | None:
    tags = config.tiles.get(tile, frozenset())
    for tag, color in TAG_COLORS:
        if tag in tags:
            return color
    return None


def _slice_rect(lo: int, hi: int, level: SliceSequence, height: int, width: int):
    """Pixel rectangle (x, y, w, h) covering slices [lo, hi)."""
    if level.orientation == COLUMNS:
        return lo * CELL, 0, (hi - lo) * CELL, height * CELL
    # rows are stored bottom to top
    return 0, (height - hi) * CELL, width * CELL, (hi - lo) * CELL


def render_svg(level: SliceSequence, config: GameConfig,
               linker_extents: Sequence[tuple[int, int]] = (),
               path: Sequence[tuple] = (),
               padding: tuple[int, int] = (0, 0)) -> str:
    """Schematic SVG: one square per tile, grey padding, magenta linker boxes.

    ``path`` holds agent states whose first two fields are (row, col) in the
    grid of ``level``.  Output is byte-stable for identical input.
    """
    grid = to_grid(level)
    w, h = grid.width, grid.height
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * CELL}" '
           f'height="{h * CELL}" viewBox="0 0 {w * CELL} {h * CELL}">',
           f'<rect class="background" x="0" y="0" width="{w * CELL}" height="{h * CELL}" '
           f'fill="#ffffff"/>']
    for r in range(h):
        for c in range(w):
            color = tile_color(grid.at(r, c), config)
            if color:
                out.append(f'<rect class="tile" x="{c * CELL}" y="{r * CELL}" '
                           f'width="{CELL}" height="{CELL}" fill="{color}"/>')
    n = len(level)
    pad_start, pad_end = padding
    for lo, hi in ((0, pad_start), (n - pad_end, n)):
        if hi > lo:
            x, y, rw, rh = _slice_rect(lo, hi, level, h, w)
            out.append(f'<rect class="padding" x="{x}" y="{y}" width="{rw}" height="{rh}" '
                       f'fill="#000000" fill-opacity="0.15"/>')
    for lo, hi in linker_extents:
        x, y, rw, rh = _slice_rect(lo, hi, level, h, w)
        if rw == 0 or rh == 0:
            # an empty linker is drawn as a line at the junction
            rw, rh = max(rw, 2), max(rh, 2)
        out.append(f'<rect class="linker" x="{x}" y="{y}" width="{rw}" height="{rh}" '
                   f'fill="none" stroke="#ff00ff" stroke-width="2"/>')
    if path:
        pts = " ".join(f"{s[1] * CELL + CELL // 2},{s[0] * CELL + CELL // 2}" for s in path)
        out.append(f'<polyline class="path" points="{pts}" fill="none" stroke="#ff0000" '
                   f'stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
