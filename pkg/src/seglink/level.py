"""Tile grids, slice sequences, game configs and structure checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

COLUMNS = "columns-left-to-right"
ROWS = "rows-bottom-to-top"
ORIENTATIONS = (COLUMNS, ROWS)

TAGS = frozenset({
    "solid", "empty", "hazard", "enemy", "food", "switch", "portal", "door",
    "pipe-part", "passable-platform", "moving-platform", "start-marker",
    "end-marker", "structure",
})

CONFIG_DIR = Path(__file__).parent / "data" / "configs"
CORPUS_DIR = Path(__file__).parent / "data" / "corpora"


class LevelError(ValueError):
    pass


class RaggedInput(LevelError):
    pass


class UnknownTile(LevelError):
    pass


class MixedOrientation(LevelError):
    pass


class MixedSliceLength(LevelError):
    pass


@dataclass(frozen=True)
class TileGrid:
    width: int
    height: int
    cells: str  # row-major, row 0 is the top line

    def __post_init__(self):
        if len(self.cells) != self.width * self.height:
            raise LevelError(
                f"cells length {len(self.cells)} != {self.width}x{self.height}")

    @classmethod
    def from_rows(cls, rows: Sequence[str]) -> "TileGrid":
        rows = list(rows)
        if not rows:
            return cls(0, 0, "")
        width = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != width:
                raise RaggedInput(f"line {i} has length {len(r)}, expected {width}")
        return cls(width, len(rows), "".join(rows))

    @property
    def rows(self) -> list[str]:
        w = self.width
        return [self.cells[i * w:(i + 1) * w] for i in range(self.height)]

    def at(self, row: int, col: int) -> str:
        return self.cells[row * self.width + col]

    def to_text(self) -> str:
        return "\n".join(self.rows) + "\n"


@dataclass(frozen=True)
class SliceSequence:
    orientation: str
    slices: tuple[str, ...] = ()

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise LevelError(f"unknown orientation {self.orientation!r}")
        if not isinstance(self.slices, tuple):
            object.__setattr__(self, "slices", tuple(self.slices))
        if self.slices:
            n = len(self.slices[0])
            if any(len(s) != n for s in self.slices):
                raise MixedSliceLength("slices differ in length")

    def __len__(self) -> int:
        return len(self.slices)

    def __iter__(self):
        return iter(self.slices)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return SliceSequence(self.orientation, self.slices[idx])
        return self.slices[idx]

    def __add__(self, other: "SliceSequence") -> "SliceSequence":
        return concatenate([self, other])

    @property
    def slice_length(self) -> int:
        return len(self.slices[0]) if self.slices else 0

    def reversed(self) -> "SliceSequence":
        return SliceSequence(self.orientation, self.slices[::-1])

    def with_slices(self, slices: Iterable[str]) -> "SliceSequence":
        return SliceSequence(self.orientation, tuple(slices))

    def to_grid(self) -> TileGrid:
        return to_grid(self)


@dataclass(frozen=True)
class StructureShape:
    """A multi-tile in-game structure.

    ``height`` (or ``width``) of 0 means the extent varies, as for pipes.
    ``pattern`` rows, when given, must match a region exactly.
    """

    name: str
    width: int
    height: int
    member_tiles: frozenset
    predicate: str  # "pipe", "door" or "block"
    pattern: tuple[str, ...] = ()

    def extent_along(self, orientation: str) -> int:
        return self.width if orientation == COLUMNS else self.height


@dataclass(frozen=True)
class AgentParams:
    kind: str = "platformer"
    max_jump_height: int = 4
    max_jump_horizontal: int = 2
    allow_horizontal_wrap: bool = False
    start_stamina: int = 40
    move_cost: int = 1
    food_gain: int = 20
    stamina_cap: int = 40
    enemy_model: str = "static-blocking"
    node_budget: int = 2_000_000

    def __post_init__(self):
        if self.kind not in ("platformer", "roguelike"):
            raise LevelError(f"unknown agent kind {self.kind!r}")
        counts = (self.max_jump_height, self.max_jump_horizontal, self.start_stamina,
                  self.move_cost, self.food_gain, self.stamina_cap, self.node_budget)
        if any(c <= 0 for c in counts):
            raise LevelError("agent counts must be positive")
        if self.food_gain > self.stamina_cap:
            raise LevelError("food_gain exceeds stamina_cap")


@dataclass(frozen=True)
class GameConfig:
    name: str
    orientation: str
    tiles: dict  # tile code -> frozenset of tags
    structure_shapes: tuple[StructureShape, ...]
    ngram_order: int
    segment_length: int
    link_search_max_depth: int
    padding_start: tuple[str, ...]
    padding_end: tuple[str, ...]
    agent_params: AgentParams
    linking_slices: tuple[str, ...] | None = None
    depth_presets: dict = field(default_factory=dict)
    behavior: tuple[str, ...] = ("density", "leniency")
    leniency_features: dict = field(default_factory=dict)
    bin_size: float = 0.05
    usable_mode: str = "unbroken"
    required_tag: str | None = None

    def __post_init__(self):
        if self.ngram_order < 2:
            raise LevelError("ngram_order must be >= 2")
        if self.link_search_max_depth < 1:
            raise LevelError("link_search_max_depth must be >= 1")
        if self.segment_length < self.ngram_order:
            raise LevelError("segment_length must be >= ngram_order")
        if self.usable_mode not in ("unbroken", "generable"):
            raise LevelError(f"unknown usable_mode {self.usable_mode!r}")
        for tags in self.tiles.values():
            unknown = set(tags) - TAGS
            if unknown:
                raise LevelError(f"unknown tile tags {sorted(unknown)}")
        alphabet = self.alphabet
        for shape in self.structure_shapes:
            if not shape.member_tiles <= alphabet:
                raise LevelError(f"structure {shape.name} uses tiles outside alphabet")
        for s in self.padding_start + self.padding_end + (self.linking_slices or ()):
            bad = set(s) - alphabet
            if bad:
                raise UnknownTile(f"padding/linking slice uses {sorted(bad)}")
        object.__setattr__(self, "_tag_cache", {})

    @property
    def alphabet(self) -> frozenset:
        return frozenset(self.tiles)

    def tagged(self, tag: str) -> frozenset:
        hit = self._tag_cache.get(tag)
        if hit is None:
            hit = frozenset(t for t, tags in self.tiles.items() if tag in tags)
            self._tag_cache[tag] = hit
        return hit

    @property
    def structure_tiles(self) -> frozenset:
        out = set()
        for shape in self.structure_shapes:
            out |= shape.member_tiles
        return frozenset(out)

    @property
    def max_structure_extent(self) -> int:
        return max((s.extent_along(self.orientation) for s in self.structure_shapes),
                   default=0)

    def depth(self, preset: str | None = None) -> int:
        if preset is None:
            return self.link_search_max_depth
        return self.depth_presets[preset]

    def empty(self, slices: Iterable[str] = ()) -> SliceSequence:
        return SliceSequence(self.orientation, tuple(slices))


def config_from_dict(d: dict) -> GameConfig:
    shapes = tuple(
        StructureShape(
            name=s["name"],
            width=s["width"],
            height=s["height"],
            member_tiles=frozenset(s["member_tiles"]),
            predicate=s["predicate"],
            pattern=tuple(s.get("pattern", ())),
        )
        for s in d.get("structure_shapes", ())
    )
    start = tuple(d["padding_slices"])
    end = tuple(d.get("padding_end_slices", start))
    linking = d.get("linking_slices")
    return GameConfig(
        name=d["name"],
        orientation=d["orientation"],
        tiles={k: frozenset(v) for k, v in d["tiles"].items()},
        structure_shapes=shapes,
        ngram_order=d["ngram_order"],
        segment_length=d["segment_length"],
        link_search_max_depth=d["link_search_max_depth"],
        padding_start=start,
        padding_end=end,
        agent_params=AgentParams(**d.get("agent_params", {})),
        linking_slices=tuple(linking) if linking is not None else None,
        depth_presets=dict(d.get("depth_presets", {})),
        behavior=tuple(d.get("behavior", ("density", "leniency"))),
        leniency_features=dict(d.get("leniency_features", {})),
        bin_size=d.get("bin_size", 0.05),
        usable_mode=d.get("usable_mode", "unbroken"),
        required_tag=d.get("required_tag"),
    )


CONFIG_ALIASES = {"dg": "dungeongrams", "dg-designer": "dungeongrams-designer"}


def load_config(path_or_name: str | Path) -> GameConfig:
    """Load a game config from a JSON path or a shipped config name."""
    path = Path(path_or_name)
    if not path.exists():
        name = path.stem if path.suffix == ".json" else str(path_or_name)
        path = CONFIG_DIR / f"{CONFIG_ALIASES.get(name, name)}.json"
        if not path.exists():
            raise FileNotFoundError(f"no game config {path_or_name!r}")
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def parse_level(text: str, config: GameConfig) -> TileGrid:
    lines = text.splitlines()
    while lines and not lines[-1]:
        lines.pop()
    grid = TileGrid.from_rows(lines)
    bad = set(grid.cells) - config.alphabet
    if bad:
        raise UnknownTile(f"tiles not in {config.name} alphabet: {sorted(bad)}")
    return grid


def to_slices(grid: TileGrid, config_or_orientation) -> SliceSequence:
    orientation = getattr(config_or_orientation, "orientation", config_or_orientation)
    rows = grid.rows
    if orientation == COLUMNS:
        slices = tuple("".join(r[c] for r in rows) for c in range(grid.width))
    else:
        slices = tuple(rows[::-1])
    return SliceSequence(orientation, slices)


def to_grid(seq: SliceSequence) -> TileGrid:
    if not seq.slices:
        return TileGrid(0, 0, "")
    if seq.orientation == COLUMNS:
        h = seq.slice_length
        rows = ["".join(s[r] for s in seq.slices) for r in range(h)]
    else:
        rows = list(seq.slices[::-1])
    return TileGrid.from_rows(rows)


def load_level(path: str | Path, config: GameConfig) -> SliceSequence:
    text = Path(path).read_text(encoding="utf-8")
    return to_slices(parse_level(text, config), config)


def load_corpus(config: GameConfig, directory: str | Path | None = None) -> list[SliceSequence]:
    """Training levels for a game, sorted by file name."""
    directory = Path(directory) if directory else CORPUS_DIR / config.name
    files = sorted(directory.glob("*.txt"))
    if not files:
        raise FileNotFoundError(f"no level files in {directory}")
    return [load_level(f, config) for f in files]


def concatenate(parts: Sequence[SliceSequence]) -> SliceSequence:
    if not parts:
        raise LevelError("nothing to concatenate")
    orientation = parts[0].orientation
    length = None
    out: list[str] = []
    for p in parts:
        if p.orientation != orientation:
            raise MixedOrientation(f"{p.orientation} != {orientation}")
        if p.slices:
            if length is None:
                length = p.slice_length
            elif p.slice_length != length:
                raise MixedSliceLength(f"{p.slice_length} != {length}")
        out.extend(p.slices)
    return SliceSequence(orientation, tuple(out))


def pad_level(seq: SliceSequence, config: GameConfig) -> SliceSequence:
    return SliceSequence(
        seq.orientation, config.padding_start + seq.slices + config.padding_end)


class BrokenStructure(NamedTuple):
    position: tuple[int, int]  # (row, col) of the region's top-left cell
    shape: StructureShape
    span: tuple[int, int]  # first and last slice index the region touches


def _regions(grid: TileGrid, members: frozenset) -> list[list[tuple[int, int]]]:
    seen = set()
    regions = []
    w, h = grid.width, grid.height
    for r in range(h):
        for c in range(w):
            if (r, c) in seen or grid.at(r, c) not in members:
                continue
            stack = [(r, c)]
            seen.add((r, c))
            cells = []
            while stack:
                y, x = stack.pop()
                cells.append((y, x))
                for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                    if (0 <= ny < h and 0 <= nx < w and (ny, nx) not in seen
                            and grid.at(ny, nx) in members):
                        seen.add((ny, nx))
                        stack.append((ny, nx))
            regions.append(sorted(cells))
    return regions


def _pipe_ok(grid: TileGrid, cells) -> bool:
    # VGLC pipe tiles: '<' '>' cap, '[' ']' body; every row pairs left with right
    def tile(r, c):
        if 0 <= r < grid.height and 0 <= c < grid.width:
            return grid.at(r, c)
        return None

    for r, c in cells:
        t = tile(r, c)
        if t == "<":
            if tile(r, c + 1) != ">" or tile(r - 1, c) in ("<", "["):
                return False
        elif t == ">":
            if tile(r, c - 1) != "<" or tile(r - 1, c) in (">", "]"):
                return False
        elif t == "[":
            if tile(r, c + 1) != "]" or tile(r - 1, c) not in ("<", "["):
                return False
        elif t == "]":
            if tile(r, c - 1) != "[" or tile(r - 1, c) not in (">", "]"):
                return False
        else:
            return False
    return True


def _pattern_ok(grid: TileGrid, cells, shape: StructureShape) -> bool:
    rows = [r for r, _ in cells]
    cols = [c for _, c in cells]
    top, left = min(rows), min(cols)
    h, w = max(rows) - top + 1, max(cols) - left + 1
    if (w, h) != (shape.width, shape.height) or len(cells) != w * h:
        return False
    if shape.pattern:
        return all(grid.at(top + i, left + j) == shape.pattern[i][j]
                   for i in range(h) for j in range(w))
    return True


def _slice_span(seq: SliceSequence, grid: TileGrid, cells) -> tuple[int, int]:
    if seq.orientation == COLUMNS:
        idx = [c for _, c in cells]
    else:
        idx = [grid.height - 1 - r for r, _ in cells]
    return min(idx), max(idx)


def find_broken_structures(seq: SliceSequence, config: GameConfig,
                           ignore_edges: bool = False) -> list[BrokenStructure]:
    """Malformed structure regions in ``seq``; an empty list means unbroken.

    With ``ignore_edges`` a region touching the first or last slice is
    skipped, since a structure cut by the sequence boundary belongs to
    whatever gets placed next to it.
    """
    if not seq.slices or not config.structure_shapes:
        return []
    grid = to_grid(seq)
    out = []
    for shape in config.structure_shapes:
        for cells in _regions(grid, shape.member_tiles):
            if shape.predicate == "pipe":
                ok = _pipe_ok(grid, cells)
            elif shape.predicate in ("door", "block"):
                ok = _pattern_ok(grid, cells, shape)
            else:
                raise LevelError(f"unknown structure predicate {shape.predicate!r}")
            if ok:
                continue
            span = _slice_span(seq, grid, cells)
            if ignore_edges and (span[0] == 0 or span[1] == len(seq) - 1):
                continue
            out.append(BrokenStructure(cells[0], shape, span))
    return out


def has_structure(slice_: str, config: GameConfig) -> bool:
    return not config.structure_tiles.isdisjoint(slice_)
