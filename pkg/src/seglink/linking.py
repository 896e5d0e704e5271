"""Linking two level segments.

A link is ``s + m + e``: ``s`` finishes any structure cut at the end of the
start segment (forward chain), ``e`` finishes one cut at the start of the
end segment (backward chain), and ``m`` comes from a depth-limited
breadth-first search over linking slices that keeps every n-gram window
generable.  A candidate is accepted only when the padded level
``start + s + m + e + end`` is completable by the game's agent.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Iterator, Sequence

from . import agents, behavior
from .level import (AgentParams, GameConfig, SliceSequence, find_broken_structures,
                    has_structure, load_corpus, pad_level)
from .markov import (NGramModel, StructureChain, UnknownStructure, is_generable,
                     structure_completions, train_ngram, train_structure_chains,
                     windows_generable)

NULL = "null"
SHORTEST = "shortest"
BC_MATCH = "bc_match"
BC_MATCH_REQUIRED = "bc_match_required"
STRATEGIES = (NULL, SHORTEST, BC_MATCH, BC_MATCH_REQUIRED)

LINKED = "linked"
NO_LINK = "no_link_found"
STRUCTURE_FAILURE = "structure_failure"

DEFAULT_STRUCTURE_FREE = "default_structure_free"
DESIGNER_DEFINED = "designer_defined"

# Searches stop after this many agent runs or enumerated candidates and report
# no_link_found with budget_exhausted set; enumeration order is fixed, so a
# budget only ever cuts the tail of the same candidate list.
DEFAULT_AGENT_BUDGET = 1000
DEFAULT_CANDIDATE_BUDGET = 200_000

Agent = Callable[[SliceSequence, GameConfig, AgentParams], agents.AgentResult]


@dataclass(frozen=True)
class LinkingSliceSet:
    slices: tuple[str, ...]
    source: str = DEFAULT_STRUCTURE_FREE

    @classmethod
    def default(cls, vocabulary, config: GameConfig) -> "LinkingSliceSet":
        return cls(tuple(sorted(s for s in vocabulary if not has_structure(s, config))),
                   DEFAULT_STRUCTURE_FREE)

    @classmethod
    def designer(cls, slices: Sequence[str]) -> "LinkingSliceSet":
        return cls(tuple(slices), DESIGNER_DEFINED)

    @property
    def requires_ngram(self) -> bool:
        # designer slices need not come from the n-gram, so windows are not checked
        return self.source == DEFAULT_STRUCTURE_FREE


@dataclass(frozen=True, eq=False)
class GameModels:
    config: GameConfig
    ngram: NGramModel
    forward: StructureChain
    backward: StructureChain
    linking: LinkingSliceSet

    @classmethod
    def train(cls, config: GameConfig, corpus: Sequence[SliceSequence] | None = None
              ) -> "GameModels":
        corpus = list(corpus) if corpus is not None else load_corpus(config)
        ngram = train_ngram(corpus, config.ngram_order)
        forward, backward = train_structure_chains(corpus, config)
        if config.linking_slices is not None:
            linking = LinkingSliceSet.designer(config.linking_slices)
        else:
            linking = LinkingSliceSet.default(ngram.vocabulary, config)
        return cls(config, ngram, forward, backward, linking)


@dataclass(frozen=True)
class LinkRequest:
    start: SliceSequence
    end: SliceSequence
    strategy: str = SHORTEST
    required_tag: str | None = None
    max_depth: int | None = None
    agent_override: AgentParams | None = None
    require_nonempty: bool = False
    agent_budget: int | None = DEFAULT_AGENT_BUDGET
    candidate_budget: int | None = DEFAULT_CANDIDATE_BUDGET

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class LinkResult:
    status: str
    strategy: str
    linker: tuple[str, ...] = ()
    structure_prefix: tuple[str, ...] = ()
    structure_suffix: tuple[str, ...] = ()
    unbroken: bool = False
    generable: bool = False
    completable: bool = False
    usable: bool = False
    rmse: float | None = None
    d_bc: float | None = None
    search_stats: dict = field(default_factory=dict)

    @property
    def full_linker(self) -> tuple[str, ...]:
        return self.structure_prefix + self.linker + self.structure_suffix

    @property
    def success(self) -> bool:
        """A link counts when it was built and the linked pair is completable."""
        return self.status == LINKED and self.completable

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "strategy": self.strategy,
            "linker": list(self.linker),
            "structure_prefix": list(self.structure_prefix),
            "structure_suffix": list(self.structure_suffix),
            "full_linker_length": len(self.full_linker),
            "unbroken": self.unbroken,
            "generable": self.generable,
            "completable": self.completable,
            "usable": self.usable,
            "rmse": self.rmse,
            "d_bc": self.d_bc,
            "search_stats": dict(sorted(self.search_stats.items())),
        }


# ---------------------------------------------------------------------------
# n-gram connection search


def connect_priors(start_prior: Sequence[str], end_prior: Sequence[str],
                   model: NGramModel, candidate_filter: LinkingSliceSet | None = None,
                   max_depth: int = 6) -> Iterator[tuple[str, ...]]:
    """Yield every linker L (|L| <= max_depth) joining the two priors.

    ``start_prior + L + end_prior`` is generable window by window.  Linkers
    come shortest first and in lexicographic slice order within a length.
    With a designer-defined ``candidate_filter`` the n-gram is not consulted.
    """
    k = model.order - 1
    start_prior = tuple(start_prior)[-k:]
    end_prior = tuple(end_prior)[:k]
    if candidate_filter is not None and not candidate_filter.requires_ngram:
        yield from _free_products(candidate_filter.slices, max_depth)
        return
    allowed = frozenset(candidate_filter.slices) if candidate_filter is not None else None

    @lru_cache(maxsize=None)
    def nexts(context):
        succ = model.successors_of(context)
        if allowed is not None:
            succ = tuple(s for s in succ if s in allowed)
        return succ

    @lru_cache(maxsize=None)
    def finishes(context):
        tail = context + end_prior
        return all(model.accepts(tail[i:i + k + 1]) for i in range(len(end_prior)))

    @lru_cache(maxsize=None)
    def completes_in(context, remaining):
        if remaining == 0:
            return finishes(context)
        return any(completes_in((context + (s,))[-k:], remaining - 1) for s in nexts(context))

    def paths(context, remaining):
        if remaining == 0:
            yield ()
            return
        for s in nexts(context):
            nxt = (context + (s,))[-k:]
            if completes_in(nxt, remaining - 1):
                for rest in paths(nxt, remaining - 1):
                    yield (s,) + rest

    for depth in range(max_depth + 1):
        if completes_in(start_prior, depth):
            yield from paths(start_prior, depth)


def _free_products(slices: Sequence[str], max_depth: int) -> Iterator[tuple[str, ...]]:
    ordered = sorted(set(slices))
    layer = [()]
    for depth in range(max_depth + 1):
        yield from layer
        layer = [p + (s,) for p in layer for s in ordered]


# ---------------------------------------------------------------------------
# evaluation helpers


def _seq(config: GameConfig, slices) -> SliceSequence:
    return SliceSequence(config.orientation, tuple(slices))


def junction_unbroken(level: Sequence[str], lo: int, hi: int, config: GameConfig) -> bool:
    """No malformed structure near the slices [lo, hi) of ``level``."""
    if not config.structure_shapes:
        return True
    margin = config.max_structure_extent + 1
    a, b = max(0, lo - margin), min(len(level), hi + margin)
    window = _seq(config, level[a:b])
    found = find_broken_structures(window, config, ignore_edges=True)
    # regions cut by the window edge were skipped; a window edge that is
    # also the level edge is a segment's own outer boundary
    return not found


def level_flags(level: SliceSequence, models: GameModels, agent: Agent = agents.quick_check,
                completable: bool | None = None) -> dict:
    config = models.config
    if completable is None:
        completable = agent(pad_level(level, config), config, config.agent_params).completable
    unbroken = not find_broken_structures(level, config, ignore_edges=True)
    generable = len(level) >= models.ngram.order and is_generable(level, models.ngram)
    gate = unbroken if config.usable_mode == "unbroken" else generable
    return {"unbroken": unbroken, "generable": generable, "completable": completable,
            "usable": completable and gate}


class _BudgetSpent(Exception):
    pass


class _Budget:
    def __init__(self, agent_runs: int | None, candidates: int | None):
        self.agent_runs = agent_runs
        self.candidates = candidates
        self.exhausted = False

    def spend(self, kind: str) -> None:
        left = getattr(self, kind)
        if left is None:
            return
        if left <= 0:
            self.exhausted = True
            raise _BudgetSpent(kind)
        setattr(self, kind, left - 1)


class _Search:
    """Candidate evaluation shared by the shortest and BC-match strategies."""

    def __init__(self, left: tuple, right: tuple, prefix: tuple, suffix: tuple,
                 req: LinkRequest, models: GameModels, agent: Agent, budget: _Budget):
        self.budget = budget
        self.config = models.config
        self.models = models
        self.left, self.right = left, right
        self.prefix, self.suffix = prefix, suffix
        self.req = req
        self.agent = agent
        self.params = req.agent_override or self.config.agent_params
        self.agent_runs = 0
        self.nodes = 0
        self.candidates = 0
        self.depth_reached = 0
        self.required = (self.config.tagged(req.required_tag)
                         if req.required_tag else None)
        self.nonempty = req.require_nonempty or (
            req.strategy == BC_MATCH_REQUIRED and req.required_tag is not None)

    def candidates_iter(self, max_depth: int):
        k = self.models.ngram.order - 1
        for m in connect_priors(self.left[-k:], self.right[:k], self.models.ngram,
                                self.models.linking, max_depth):
            self.budget.spend("candidates")
            self.candidates += 1
            self.depth_reached = max(self.depth_reached, len(m))
            if self.nonempty and not m:
                continue
            if self.required is not None and not any(
                    not self.required.isdisjoint(s) for s in m):
                continue
            yield m

    def assembled(self, m: tuple) -> tuple:
        return self.left + m + self.right

    def acceptable(self, m: tuple) -> bool:
        level = self.assembled(m)
        lo = len(self.left) - len(self.prefix)
        hi = len(self.left) + len(m) + len(self.suffix)
        if not junction_unbroken(level, lo, hi, self.config):
            return False
        self.budget.spend("agent_runs")
        self.agent_runs += 1
        res = self.agent(pad_level(_seq(self.config, level), self.config), self.config,
                         self.params)
        self.nodes += res.nodes_expanded
        return res.completable

    def stats(self) -> dict:
        return {"candidates": self.candidates, "agent_runs": self.agent_runs,
                "nodes": self.nodes, "depth_reached": self.depth_reached}


def _rmse_for(full: tuple, start: SliceSequence, end: SliceSequence,
              config: GameConfig) -> float:
    scorer = behavior.LinkerScorer(config, behavior.bc_vector(start, config),
                                   behavior.bc_vector(end, config), config.orientation)
    return scorer.rmse(full)


def _finish(req: LinkRequest, models: GameModels, agent: Agent, prefix: tuple, m: tuple,
            suffix: tuple, stats: dict) -> LinkResult:
    config = models.config
    full = prefix + m + suffix
    level = _seq(config, req.start.slices + full + req.end.slices)
    completable = None if req.agent_override else True
    flags = level_flags(level, models, agent, completable)
    concat = _seq(config, req.start.slices + req.end.slices)
    return LinkResult(
        status=LINKED, strategy=req.strategy, linker=m, structure_prefix=prefix,
        structure_suffix=suffix, rmse=_rmse_for(full, req.start, req.end, config),
        d_bc=behavior.d_bc(concat, level, config), search_stats=stats, **flags)


def _search_between(req: LinkRequest, models: GameModels, agent: Agent,
                    prefix: tuple = (), suffix: tuple = (), budget: _Budget | None = None):
    """Run the request's strategy between start+prefix and suffix+end.

    Returns (m, stats) with m None when nothing within depth (or budget) is
    acceptable.
    """
    budget = budget or _Budget(req.agent_budget, req.candidate_budget)
    search = _Search(req.start.slices + prefix, suffix + req.end.slices, prefix, suffix,
                     req, models, agent, budget)
    try:
        return _run_strategy(search, req, models, prefix, suffix), search.stats()
    except _BudgetSpent:
        return None, search.stats()


def _run_strategy(search: _Search, req: LinkRequest, models: GameModels, prefix: tuple,
                  suffix: tuple):
    config = models.config
    max_depth = req.max_depth if req.max_depth is not None else config.link_search_max_depth
    if req.strategy == SHORTEST:
        for m in search.candidates_iter(max_depth):
            if search.acceptable(m):
                return m
        return None
    # BC-match: rank every candidate by RMSE, then take the first completable one
    scorer = behavior.LinkerScorer(config, behavior.bc_vector(req.start, config),
                                   behavior.bc_vector(req.end, config), config.orientation)
    ranked = []
    try:
        for m in search.candidates_iter(max_depth):
            ranked.append((scorer.rmse(prefix + m + suffix), len(m), m))
    except _BudgetSpent:
        pass  # rank what was enumerated; the flag is already set
    ranked.sort()
    for _, _, m in ranked:
        if search.acceptable(m):
            return m
    return None


# ---------------------------------------------------------------------------
# strategies


def null_link(req: LinkRequest, models: GameModels,
              agent: Agent = agents.quick_check) -> LinkResult:
    config = models.config
    level = _seq(config, req.start.slices + req.end.slices)
    flags = level_flags(level, models, agent)
    return LinkResult(status=LINKED, strategy=NULL, rmse=None, d_bc=0.0,
                      search_stats={"candidates": 1, "agent_runs": 1}, **flags)


def shortest_link(req: LinkRequest, models: GameModels,
                  agent: Agent = agents.quick_check) -> LinkResult:
    req = replace(req, strategy=SHORTEST)
    m, stats = _search_between(req, models, agent)
    if m is None:
        return LinkResult(status=NO_LINK, strategy=SHORTEST, search_stats=stats)
    return _finish(req, models, agent, (), m, (), stats)


def bc_match_link(req: LinkRequest, models: GameModels,
                  agent: Agent = agents.quick_check) -> LinkResult:
    if req.strategy not in (BC_MATCH, BC_MATCH_REQUIRED):
        req = replace(req, strategy=BC_MATCH)
    m, stats = _search_between(req, models, agent)
    if m is None:
        return LinkResult(status=NO_LINK, strategy=req.strategy, search_stats=stats)
    return _finish(req, models, agent, (), m, (), stats)


def _junctions_generable(prefix: tuple, suffix: tuple, req: LinkRequest,
                         models: GameModels) -> bool:
    if not models.linking.requires_ngram:
        return True
    n = models.ngram.order
    left = req.start.slices + prefix
    right = suffix + req.end.slices
    return (windows_generable(left, models.ngram, len(req.start), len(left))
            and windows_generable(right, models.ngram, n - 1, len(suffix) + n - 1))


def build_link(req: LinkRequest, models: GameModels,
               agent: Agent = agents.quick_check) -> LinkResult:
    """Structure completion on both boundaries, then the strategy search."""
    if req.strategy == NULL:
        return null_link(req, models, agent)
    config = models.config
    try:
        prefixes = structure_completions(models.forward, req.start.slices, config)
        suffixes = structure_completions(models.backward, req.end.slices[::-1], config)
    except UnknownStructure as exc:
        return LinkResult(status=STRUCTURE_FAILURE, strategy=req.strategy,
                          search_stats={"error": str(exc)})
    totals = {"candidates": 0, "agent_runs": 0, "nodes": 0, "depth_reached": 0,
              "completion_pairs": 0}
    budget = _Budget(req.agent_budget, req.candidate_budget)
    for s in prefixes:
        for e in suffixes:
            if not _junctions_generable(s, e, req, models):
                continue
            totals["completion_pairs"] += 1
            m, stats = _search_between(req, models, agent, s, e, budget)
            for key in ("candidates", "agent_runs", "nodes"):
                totals[key] += stats[key]
            totals["depth_reached"] = max(totals["depth_reached"], stats["depth_reached"])
            totals["budget_exhausted"] = budget.exhausted
            if m is not None:
                return _finish(req, models, agent, s, m, e, totals)
            if budget.exhausted:
                break
    totals["budget_exhausted"] = budget.exhausted
    return LinkResult(status=NO_LINK, strategy=req.strategy, search_stats=totals)


def link(req: LinkRequest, models: GameModels, agent: Agent = agents.quick_check) -> LinkResult:
    return build_link(req, models, agent)


# ---------------------------------------------------------------------------
# multi-segment levels


@dataclass(frozen=True)
class ChainResult:
    level: SliceSequence | None
    per_pair: tuple[LinkResult, ...]
    linkable: bool
    completable: bool
    generable: bool
    unbroken: bool
    usable: bool
    linker_extents: tuple[tuple[int, int], ...] = ()


def assemble(segments: Sequence[SliceSequence], links: Sequence[LinkResult],
             config: GameConfig) -> tuple[SliceSequence, tuple]:
    slices: list[str] = []
    extents = []
    for i, seg in enumerate(segments):
        slices.extend(seg.slices)
        if i < len(links):
            full = links[i].full_linker
            extents.append((len(slices), len(slices) + len(full)))
            slices.extend(full)
    return _seq(config, slices), tuple(extents)


def chain_segments(segments: Sequence[SliceSequence], models: GameModels,
                   strategy: str = SHORTEST, agent: Agent = agents.quick_check,
                   links: Sequence[LinkResult] | None = None, **request_kwargs) -> ChainResult:
    """Link k segments pairwise and independently, then judge the whole level.

    Precomputed pairwise ``links`` may be passed in; otherwise each adjacent
    pair is linked with ``build_link``.
    """
    if len(segments) < 2:
        raise ValueError("need at least two segments")
    if links is None:
        links = [build_link(LinkRequest(a, b, strategy, **request_kwargs), models, agent)
                 for a, b in zip(segments, segments[1:])]
    links = tuple(links)
    linkable = all(r.success for r in links)
    if not linkable:
        return ChainResult(None, links, False, False, False, False, False)
    level, extents = assemble(segments, links, models.config)
    flags = level_flags(level, models, agent)
    return ChainResult(level, links, True, flags["completable"], flags["generable"],
                       flags["unbroken"], flags["usable"], extents)
