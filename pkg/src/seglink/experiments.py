"""Experiment runners: pairwise sweeps, k-segment chaining and grid-walk usability.

All runners are deterministic functions of (models, segments, spec).  Work is
fanned out over a process pool with ``executor.map``, which keeps results in
submission order, so ``jobs`` never changes a reported number.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import agents, behavior
from .level import GameConfig, SliceSequence, load_level, pad_level, to_grid
from .linking import (NULL, SHORTEST, GameModels, LinkRequest, LinkResult,
                      build_link, chain_segments)
from .markov import NGramModel, StructureChain, sample_segment

PAIRWISE = "pairwise_sweep"
K_SEGMENT = "k_segment_random"
GRID_WALK = "multi_segment_grid_walk"

PAIR_COLUMNS = ("game", "strategy", "start_id", "end_id", "status", "unbroken", "generable",
                "completable", "usable", "linker_len", "rmse", "d_bc", "nodes")


class CorpusMissing(FileNotFoundError):
    pass


@dataclass(frozen=True)
class Segment:
    id: str
    level: SliceSequence
    bc: tuple[float, ...]
    bin: tuple[int, ...]


@dataclass(frozen=True)
class ExperimentSpec:
    game: str
    mode: str = PAIRWISE
    strategies: tuple[str, ...] = (NULL, SHORTEST)
    k: int = 2
    trials: int = 1000
    seed: int = 0
    depth_preset: str | None = None
    max_depth: int | None = None
    max_pairs: int | None = None
    required_tag: str | None = None
    require_nonempty: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.mode not in (PAIRWISE, K_SEGMENT, GRID_WALK):
            raise ValueError(f"unknown mode {self.mode!r}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["strategies"] = list(self.strategies)
        del d["jobs"]  # parallelism must not show up in outputs
        return d


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    rows: list[dict]
    summary: dict
    extra: dict = field(default_factory=dict)

    def summary_json(self) -> str:
        payload = {"spec": self.spec.to_json(), "summary": self.summary, **self.extra}
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# models and segments


def corpus_fingerprint(config: GameConfig, corpus_dir: Path | None = None) -> str:
    from .level import CORPUS_DIR

    directory = Path(corpus_dir) if corpus_dir else CORPUS_DIR / config.name
    h = hashlib.sha256()
    h.update(f"{config.name}:{config.ngram_order}:{config.orientation}".encode())
    h.update(",".join(sorted(sh.name for sh in config.structure_shapes)).encode())
    for f in sorted(directory.glob("*.txt")):
        h.update(f.name.encode())
        h.update(f.read_bytes())
    return h.hexdigest()[:16]


def cache_dir() -> Path | None:
    path = os.environ.get("SEGLINK_CACHE")
    return Path(path) if path else None


def save_models(models: GameModels, directory: Path, fingerprint: str = "") -> None:
    directory.mkdir(parents=True, exist_ok=True)
    models.ngram.save(directory / "ngram.json")
    for chain in (models.forward, models.backward):
        (directory / f"{chain.direction}.json").write_text(
            json.dumps(chain.to_json()), encoding="utf-8")
    (directory / "fingerprint.txt").write_text(fingerprint, encoding="utf-8")


def load_models(config: GameConfig, directory: Path) -> GameModels:
    from .linking import LinkingSliceSet

    ngram = NGramModel.load(directory / "ngram.json")
    forward = StructureChain.from_json(
        json.loads((directory / "forward.json").read_text(encoding="utf-8")))
    backward = StructureChain.from_json(
        json.loads((directory / "backward.json").read_text(encoding="utf-8")))
    if config.linking_slices is not None:
        linking = LinkingSliceSet.designer(config.linking_slices)
    else:
        linking = LinkingSliceSet.default(ngram.vocabulary, config)
    return GameModels(config, ngram, forward, backward, linking)


def get_models(config: GameConfig, corpus_dir: Path | None = None) -> GameModels:
    """Train, or reuse models cached under $SEGLINK_CACHE for the same corpus."""
    from .level import load_corpus

    root = cache_dir()
    if root is None:
        return GameModels.train(config, load_corpus(config, corpus_dir))
    fp = corpus_fingerprint(config, corpus_dir)
    where = root / config.name / fp
    if (where / "fingerprint.txt").exists():
        return load_models(config, where)
    models = GameModels.train(config, load_corpus(config, corpus_dir))
    save_models(models, where, fp)
    return models


def bc_bin(bc: Sequence[float], config: GameConfig) -> tuple[int, ...]:
    # the small epsilon keeps values sitting on a bin edge from flipping bins
    return tuple(int(math.floor(v / config.bin_size + 1e-9)) for v in bc)


def make_segment(seg_id: str, level: SliceSequence, config: GameConfig) -> Segment:
    bc = behavior.bc_vector(level, config)
    return Segment(seg_id, level, bc, bc_bin(bc, config))


def synthesize_segments(models: GameModels, count: int, seed: int = 0) -> list[Segment]:
    """Sample completable segments from the game's n-gram.

    Both boundaries must also occur mid-level in training (the first context
    has a predecessor, the last has a successor), otherwise no linker can
    ever attach to them.
    """
    config = models.config
    preds = _predecessor_contexts(models.ngram)

    def accept(seq: SliceSequence) -> bool:
        k = models.ngram.order - 1
        if seq.slices[:k] not in preds or not models.ngram.successors_of(seq.slices[-k:]):
            return False
        return agents.quick_check(pad_level(seq, config), config).completable

    out = []
    for i in range(count):
        level = sample_segment(models.ngram, config.segment_length, seed * 1_000_003 + i,
                               require=accept, orientation=config.orientation)
        out.append(make_segment(f"seg-{i:04d}", level, config))
    return out


def _predecessor_contexts(model: NGramModel) -> set:
    out = set()
    for prior, nexts in model.successors.items():
        for s in nexts:
            out.add((prior + (s,))[1:])
    return out


def write_segments(segments: Sequence[Segment], directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    index = []
    for seg in segments:
        (directory / f"{seg.id}.txt").write_text(to_grid(seg.level).to_text(), encoding="utf-8")
        index.append({"id": seg.id, "bc": list(seg.bc), "bin": list(seg.bin)})
    (directory / "index.json").write_text(json.dumps(index, indent=1) + "\n", encoding="utf-8")


def read_segments(directory: Path, config: GameConfig) -> list[Segment]:
    """Ingest a directory of segment text files (ids are file stems, sorted)."""
    directory = Path(directory)
    files = sorted(directory.glob("*.txt"))
    if not files:
        raise CorpusMissing(f"no segment files in {directory}")
    return [make_segment(f.stem, load_level(f, config), config) for f in files]


# ---------------------------------------------------------------------------
# pair selection


def neighbor_pairs(segments: Sequence[Segment], min_pairs: int = 0) -> tuple[list, str]:
    """Ordered pairs of distinct segments in neighboring BC grid cells.

    When the grid gives fewer than ``min_pairs`` pairs, the nearest segments
    in BC space are added until the target is met.
    """
    by_bin: dict = {}
    for i, seg in enumerate(segments):
        by_bin.setdefault(seg.bin, []).append(i)
    pairs = []
    for i, seg in enumerate(segments):
        for j in _grid_neighbors(i, seg, by_bin):
            pairs.append((i, j))
    mode = "grid_neighbors"
    if len(pairs) < min_pairs:
        mode = "grid_neighbors+bc_nearest"
        have = set(pairs)
        bcs = np.array([s.bc for s in segments], dtype=float)
        order = []
        for i in range(len(segments)):
            d = np.sqrt(((bcs - bcs[i]) ** 2).sum(axis=1))
            ranked = sorted((float(d[j]), j) for j in range(len(segments)) if j != i)
            order.append([j for _, j in ranked])
        rank = 0
        while len(pairs) < min_pairs and rank < len(segments) - 1:
            for i in range(len(segments)):
                p = (i, order[i][rank])
                if p not in have:
                    have.add(p)
                    pairs.append(p)
                    if len(pairs) >= min_pairs:
                        break
            rank += 1
    return sorted(pairs), mode


def _grid_neighbors(i: int, seg: Segment, by_bin: dict) -> list[int]:
    out = []
    for delta in _moore(len(seg.bin)):
        cell = tuple(b + d for b, d in zip(seg.bin, delta))
        out.extend(j for j in by_bin.get(cell, ()) if j != i)
    return sorted(out)


def _moore(dims: int) -> list[tuple[int, ...]]:
    cells = [()]
    for _ in range(dims):
        cells = [c + (d,) for c in cells for d in (-1, 0, 1)]
    return cells


# ---------------------------------------------------------------------------
# worker pool

_WORKER_MODELS: GameModels | None = None


def _init_worker(models: GameModels) -> None:
    global _WORKER_MODELS
    _WORKER_MODELS = models


def _link_task(task) -> LinkResult:
    start, end, strategy, kwargs = task
    return build_link(LinkRequest(start, end, strategy, **kwargs), _WORKER_MODELS)


def _chain_task(task):
    segments, links = task
    return chain_segments(segments, _WORKER_MODELS, links=links)


def _pool_map(fn, tasks: list, models: GameModels, jobs: int) -> list:
    if jobs <= 1 or len(tasks) < 2:
        _init_worker(models)
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                             initargs=(models,)) as ex:
        return list(ex.map(fn, tasks, chunksize=chunk))


def _request_kwargs(spec: ExperimentSpec, config: GameConfig) -> dict:
    kwargs = {}
    if spec.max_depth is not None:
        kwargs["max_depth"] = spec.max_depth
    elif spec.depth_preset is not None:
        kwargs["max_depth"] = config.depth(spec.depth_preset)
    if spec.required_tag is not None:
        kwargs["required_tag"] = spec.required_tag
    if spec.require_nonempty:
        kwargs["require_nonempty"] = True
    return kwargs


# ---------------------------------------------------------------------------
# aggregation


def link_row(game: str, strategy: str, a: Segment, b: Segment, r: LinkResult) -> dict:
    return {
        "game": game, "strategy": strategy, "start_id": a.id, "end_id": b.id,
        "status": r.status, "unbroken": int(r.unbroken), "generable": int(r.generable),
        "completable": int(r.completable), "usable": int(r.usable),
        "linker_len": len(r.full_linker), "rmse": r.rmse, "d_bc": r.d_bc,
        "nodes": int(r.search_stats.get("nodes", 0)),
    }


def _dist(values: Iterable[float]) -> dict:
    vals = [v for v in values if v is not None]
    if not vals:
        return {"n": 0, "mean": None, "median": None, "max": None}
    arr = np.array(vals, dtype=float)
    return {"n": len(vals), "mean": float(arr.mean()), "median": float(np.median(arr)),
            "max": float(arr.max())}


def summarize_pairs(rows: Sequence[dict]) -> dict:
    """Per-strategy rates and distributions; recomputable from pairs.csv."""
    out = {}
    for strategy in sorted({r["strategy"] for r in rows}):
        sub = [r for r in rows if r["strategy"] == strategy]
        n = len(sub)
        linked = [r for r in sub if r["status"] == "linked"]
        out[strategy] = {
            "pairs": n,
            "linked": sum(r["status"] == "linked" for r in sub) / n,
            "unbroken": sum(r["unbroken"] for r in sub) / n,
            "generable": sum(r["generable"] for r in sub) / n,
            "completable": sum(r["completable"] for r in sub) / n,
            "usable": sum(r["usable"] for r in sub) / n,
            "linker_len": _dist(r["linker_len"] for r in linked if r["completable"]),
            "rmse": _dist(r["rmse"] for r in linked if r["completable"]),
            "d_bc": _dist(r["d_bc"] for r in linked if r["completable"]),
        }
    return out


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=PAIR_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r[k] is None else repr(r[k]) if isinstance(r[k], float)
                        else r[k]) for k in PAIR_COLUMNS})
    return buf.getvalue()


def rows_from_csv(text: str) -> list[dict]:
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = dict(rec)
        for k in ("unbroken", "generable", "completable", "usable", "linker_len", "nodes"):
            row[k] = int(row[k])
        for k in ("rmse", "d_bc"):
            row[k] = float(row[k]) if row[k] != "" else None
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# runners


def run_pairwise_sweep(spec: ExperimentSpec, models: GameModels,
                       segments: Sequence[Segment]) -> ExperimentReport:
    if not segments:
        raise CorpusMissing("no segments to sweep")
    pairs, mode = neighbor_pairs(segments, spec.max_pairs or 0)
    if spec.max_pairs is not None and len(pairs) > spec.max_pairs:
        rng = random.Random(spec.seed)
        pairs = sorted(rng.sample(pairs, spec.max_pairs))
    kwargs = _request_kwargs(spec, models.config)
    tasks = [(segments[i].level, segments[j].level, s, kwargs)
             for s in spec.strategies for i, j in pairs]
    results = _pool_map(_link_task, tasks, models, spec.jobs)
    rows = []
    it = iter(results)
    for s in spec.strategies:
        for i, j in pairs:
            rows.append(link_row(models.config.name, s, segments[i], segments[j], next(it)))
    summary = summarize_pairs(rows)
    return ExperimentReport(spec, rows, summary,
                            {"pairing": mode, "segments": len(segments), "pairs": len(pairs)})


def _chain_summary(chains) -> dict:
    n = len(chains)
    linkable = sum(c.linkable for c in chains)
    completable = sum(c.completable for c in chains)
    usable = sum(c.usable for c in chains)
    return {
        "trials": n,
        "linkable": linkable / n,
        "completable": completable / n,
        "usable": usable / n,
        "unbroken": sum(c.unbroken for c in chains) / n,
        "generable": sum(c.generable for c in chains) / n,
        "completable_given_linkable": completable / linkable if linkable else None,
        "usable_given_completable": usable / completable if completable else None,
    }


def _link_unique(pairs: list, segments: Sequence[Segment], strategy: str, kwargs: dict,
                 models: GameModels, jobs: int) -> dict:
    unique = sorted(set(pairs))
    tasks = [(segments[i].level, segments[j].level, strategy, kwargs) for i, j in unique]
    return dict(zip(unique, _pool_map(_link_task, tasks, models, jobs)))


def run_k_segment_experiment(spec: ExperimentSpec, models: GameModels,
                             segments: Sequence[Segment]) -> ExperimentReport:
    """Random k-tuples linked pairwise and judged as whole levels."""
    if len(segments) < spec.k:
        raise CorpusMissing(f"need at least {spec.k} segments")
    rng = random.Random(spec.seed)
    tuples = [tuple(rng.sample(range(len(segments)), spec.k)) for _ in range(spec.trials)]
    kwargs = _request_kwargs(spec, models.config)
    summary, rows = {}, []
    for strategy in spec.strategies:
        chains = _chains_for(tuples, segments, strategy, kwargs, models, spec.jobs)
        summary[strategy] = _chain_summary(chains)
        for t, c in zip(tuples, chains):
            rows.append({"strategy": strategy, "segments": " ".join(segments[i].id for i in t),
                         "linkable": int(c.linkable), "completable": int(c.completable),
                         "usable": int(c.usable)})
    return ExperimentReport(spec, rows, summary)


def _chains_for(tuples, segments, strategy, kwargs, models, jobs):
    pairs = [(t[i], t[i + 1]) for t in tuples for i in range(len(t) - 1)]
    links = _link_unique(pairs, segments, strategy, kwargs, models, jobs)
    tasks = [([segments[i].level for i in t], [links[(t[i], t[i + 1])] for i in range(len(t) - 1)])
             for t in tuples]
    return _pool_map(_chain_task, tasks, models, jobs)


def segment_neighbors(segments: Sequence[Segment], fallback: int = 8) -> list[list[int]]:
    """Grid neighbors of every segment; isolated cells use the nearest BCs."""
    by_bin: dict = {}
    for i, seg in enumerate(segments):
        by_bin.setdefault(seg.bin, []).append(i)
    bcs = np.array([s.bc for s in segments], dtype=float)
    out = []
    for i, seg in enumerate(segments):
        near = _grid_neighbors(i, seg, by_bin)
        if not near:
            d = np.sqrt(((bcs - bcs[i]) ** 2).sum(axis=1))
            near = [j for _, j in sorted((float(d[j]), j) for j in range(len(segments))
                                         if j != i)][:fallback]
        out.append(near)
    return out


class LinkCache:
    """Lazily built pairwise links, shared by the walks of several experiments."""

    def __init__(self, models: GameModels, segments: Sequence[Segment]):
        self.models = models
        self.segments = segments
        self.links: dict = {}

    def get(self, i: int, j: int, strategy: str, kwargs: dict) -> LinkResult:
        key = (i, j, strategy, tuple(sorted(kwargs.items())))
        hit = self.links.get(key)
        if hit is None:
            hit = self.links[key] = build_link(
                LinkRequest(self.segments[i].level, self.segments[j].level, strategy, **kwargs),
                self.models)
        return hit


def grid_walks(neighbors: Sequence[Sequence[int]], k: int, trials: int, seed: int,
               links_ok) -> list[tuple[int, ...]]:
    """Neighbor-by-neighbor walks through the BC grid over validated links.

    Each step visits the current segment's neighbors in a seeded random order
    and takes the first whose pairwise link succeeds (``links_ok(i, j)``).
    Walks that get stuck are dropped and a new start is drawn.
    """
    rng = random.Random(seed)
    walks = []
    attempts = 0
    while len(walks) < trials:
        attempts += 1
        if attempts > trials * 50:
            raise RuntimeError("grid walk could not build enough levels")
        walk = [rng.randrange(len(neighbors))]
        while len(walk) < k:
            options = list(neighbors[walk[-1]])
            nxt = next((j for j in rng.sample(options, len(options))
                        if links_ok(walk[-1], j)), None)
            if nxt is None:
                break
            walk.append(nxt)
        if len(walk) == k:
            walks.append(tuple(walk))
    return walks


def usability_variants(spec: ExperimentSpec, config: GameConfig) -> list[tuple[str, dict]]:
    base = _request_kwargs(spec, config)
    base.pop("required_tag", None)
    base.pop("require_nonempty", None)
    variants = [("plain", base)]
    tag = spec.required_tag or config.required_tag
    if tag:
        variants.append((f"required_{tag}",
                         {**base, "required_tag": tag, "require_nonempty": True}))
    return variants


def run_multi_segment_usability(spec: ExperimentSpec, models: GameModels,
                                segments: Sequence[Segment],
                                cache: LinkCache | None = None) -> ExperimentReport:
    """Usable rate of k-segment levels built from validated neighbor links.

    Games with a required tag (DungeonGrams food) are run twice: plain, and
    with every linker forced to contain a non-empty tagged slice run.
    """
    if not 2 <= spec.k <= 5:
        raise ValueError("k must be in 2..5")
    cache = cache or LinkCache(models, segments)
    neighbors = segment_neighbors(segments)
    strategy = spec.strategies[0]
    summary, rows = {}, []
    for name, kwargs in usability_variants(spec, models.config):
        walks = grid_walks(neighbors, spec.k, spec.trials, spec.seed,
                           lambda i, j: cache.get(i, j, strategy, kwargs).success)
        tasks = [([segments[i].level for i in w],
                  [cache.get(w[i], w[i + 1], strategy, kwargs) for i in range(len(w) - 1)])
                 for w in walks]
        chains = _pool_map(_chain_task, tasks, models, spec.jobs)
        summary[name] = _chain_summary(chains)
        for w, c in zip(walks, chains):
            rows.append({"variant": name, "segments": " ".join(segments[i].id for i in w),
                         "linkable": int(c.linkable), "completable": int(c.completable),
                         "usable": int(c.usable)})
    return ExperimentReport(spec, rows, summary, {"strategy": strategy})


def link_stats(rows: Sequence[dict]) -> dict:
    """Linker length and D_BC distributions per strategy over linked pairs."""
    out = {}
    for strategy in sorted({r["strategy"] for r in rows}):
        linked = [r for r in rows if r["strategy"] == strategy and r["status"] == "linked"
                  and r["completable"]]
        out[strategy] = {"length": _dist(r["linker_len"] for r in linked),
                         "d_bc": _dist(r["d_bc"] for r in linked)}
    return out


def write_report(report: ExperimentReport, out: Path, fmt: str = "csv",
                 rows_name: str = "pairs") -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(report.summary_json(), encoding="utf-8")
    if fmt == "json":
        (out / f"{rows_name}.json").write_text(
            json.dumps(report.rows, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    elif report.spec.mode == PAIRWISE:
        (out / f"{rows_name}.csv").write_text(rows_to_csv(report.rows), encoding="utf-8")
    else:
        buf = io.StringIO()
        if report.rows:
            w = csv.DictWriter(buf, fieldnames=list(report.rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(report.rows)
        (out / f"{rows_name}.csv").write_text(buf.getvalue(), encoding="utf-8")
