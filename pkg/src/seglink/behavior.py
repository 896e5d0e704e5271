"""Behavioral characteristics and the linker-quality metrics.

BCs are computed from per-slice features that are cached, because the
BC-matching search scores many thousands of short candidate linkers.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Sequence

from .level import COLUMNS, GameConfig, SliceSequence


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


@lru_cache(maxsize=None)
def _features(slice_: str, solid: frozenset, weighted: tuple) -> tuple[int, int, float]:
    """(top solid height, solid tiles, weighted tagged-tile count) of one slice."""
    height = 0
    for r, t in enumerate(slice_):
        if t in solid:
            height = len(slice_) - r
            break
    n_solid = sum(t in solid for t in slice_)
    tagged = sum(w * sum(t in tiles for t in slice_) for tiles, w in weighted)
    return height, n_solid, tagged


_WEIGHTED: dict = {}


def _weighted_tags(config: GameConfig) -> tuple:
    key = id(config)
    hit = _WEIGHTED.get(key)
    if hit is None or hit[0] is not config:
        tags = tuple((config.tagged(f), w) for f, w in sorted(config.leniency_features.items())
                     if f != "gap")
        hit = _WEIGHTED[key] = (config, tags)
    return hit[1]


def _slice_features(seq: SliceSequence, config: GameConfig):
    solid = config.tagged("solid")
    weighted = _weighted_tags(config)
    return [_features(s, solid, weighted) for s in seq.slices]





def column_heights(seq: SliceSequence, config: GameConfig) -> list[int]:
    """Height of the topmost solid tile in each column, 0 for empty columns."""
    if seq.orientation != COLUMNS:
        raise ValueError("column heights need a column-sliced level")
    return [f[0] for f in _slice_features(seq, config)]


@lru_cache(maxsize=None)
def _centered(n: int) -> tuple[tuple[float, ...], float]:
    xm = (n - 1) / 2
    dx = tuple(x - xm for x in range(n))
    return dx, sum(d * d for d in dx)


def line_residual(values: Sequence[float]) -> float:
    """Mean absolute residual of the least-squares line through ``values``."""
    n = len(values)
    if n < 2:
        return 0.0
    dx, sxx = _centered(n)
    ym = sum(values) / n
    slope = sum(d * (y - ym) for d, y in zip(dx, values)) / sxx
    return sum(abs(y - (ym + slope * d)) for d, y in zip(dx, values)) / n


def linearity(seq: SliceSequence, config: GameConfig) -> float:
    if seq.orientation != COLUMNS:
        raise ValueError("linearity needs a column-sliced level")
    if len(seq) < 2:
        return 1.0
    return _clamp(1.0 - line_residual(column_heights(seq, config)) / seq.slice_length)


def density(seq: SliceSequence, config: GameConfig) -> float:
    if not seq.slices:
        return 0.0
    total = sum(f[1] for f in _slice_features(seq, config))
    return total / (len(seq) * seq.slice_length)


def _gap_count(seq: SliceSequence, config: GameConfig) -> int:
    solid = config.tagged("solid")
    if seq.orientation == COLUMNS:
        return sum(s[-1] not in solid for s in seq.slices)
    return sum(t not in solid for t in seq.slices[0])


def hazard_count(seq: SliceSequence, config: GameConfig) -> float:
    """Weighted count of the game's leniency features.

    ``gap`` counts columns whose bottom tile is not solid; every other
    feature name is a tile tag counted per tile.
    """
    if not seq.slices:
        return 0.0
    total = sum(f[2] for f in _slice_features(seq, config))
    weight = config.leniency_features.get("gap")
    if weight:
        total += weight * _gap_count(seq, config)
    return total


def leniency(seq: SliceSequence, config: GameConfig) -> float:
    if len(seq) == 0:
        return 1.0
    return _clamp(1.0 - hazard_count(seq, config) / len(seq))


BC_FUNCS = {"linearity": linearity, "density": density, "leniency": leniency}


def _bc_from_features(feats: list, gaps: int, n: int, h: int, orientation: str,
                      config: GameConfig) -> tuple[float, ...]:
    out = []
    for name in config.behavior:
        if name == "linearity":
            if orientation != COLUMNS:
                raise ValueError("linearity needs a column-sliced level")
            out.append(1.0 if n < 2 else
                       _clamp(1.0 - line_residual([f[0] for f in feats]) / h))
        elif name == "density":
            out.append(sum(f[1] for f in feats) / (n * h))
        elif name == "leniency":
            count = sum(f[2] for f in feats)
            weight = config.leniency_features.get("gap")
            if weight:
                count += weight * gaps
            out.append(_clamp(1.0 - count / n))
        else:
            raise KeyError(name)
    return tuple(out)


def bc_vector(seq: SliceSequence, config: GameConfig) -> tuple[float, ...]:
    if not seq.slices:
        return tuple(BC_FUNCS[name](seq, config) for name in config.behavior)
    return _bc_from_features(_slice_features(seq, config), _gap_count(seq, config),
                             len(seq), seq.slice_length, seq.orientation, config)


class LinkerScorer:
    """RMSE of many candidate linkers against one (start, end) pair.

    Gives the same numbers as ``linker_rmse(linker_bc(...))`` without
    building a SliceSequence per candidate.
    """

    def __init__(self, config: GameConfig, start_bc, end_bc, orientation: str):
        self.config = config
        self.start_bc, self.end_bc = tuple(start_bc), tuple(end_bc)
        self.orientation = orientation
        self.solid = config.tagged("solid")
        self.weighted = _weighted_tags(config)

    def rmse(self, slices: Sequence[str]) -> float:
        if not slices:
            lbc = linker_bc(SliceSequence(self.orientation, ()), self.start_bc, self.end_bc,
                            self.config)
        else:
            feats = [_features(s, self.solid, self.weighted) for s in slices]
            if self.orientation == COLUMNS:
                gaps = sum(s[-1] not in self.solid for s in slices)
            else:
                gaps = sum(t not in self.solid for t in slices[0])
            lbc = _bc_from_features(feats, gaps, len(slices), len(slices[0]),
                                    self.orientation, self.config)
        return linker_rmse(lbc, self.start_bc, self.end_bc)


def linker_rmse(linker_bc: Sequence[float], start_bc: Sequence[float],
                end_bc: Sequence[float]) -> float:
    if not (len(linker_bc) == len(start_bc) == len(end_bc)):
        raise ValueError("BC vectors differ in length")
    target = [(s + e) / 2 for s, e in zip(start_bc, end_bc)]
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(linker_bc, target)) / len(target))


def linker_bc(linker: SliceSequence, start_bc, end_bc, config: GameConfig):
    """BC of a linker; an empty linker takes the mean of its neighbors."""
    if len(linker) == 0:
        return tuple((s + e) / 2 for s, e in zip(start_bc, end_bc))
    return bc_vector(linker, config)


def d_bc(concatenated: SliceSequence, linked: SliceSequence, config: GameConfig) -> float:
    a = bc_vector(concatenated, config)
    b = bc_vector(linked, config)
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))
