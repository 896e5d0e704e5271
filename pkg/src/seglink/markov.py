"""N-gram slice models and the forward/backward structure-completion chains."""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .level import GameConfig, SliceSequence, has_structure

NGRAM_SCHEMA = "seglink.ngram/1"
CHAIN_SCHEMA = "seglink.chain/1"

FORWARD = "forward"
BACKWARD = "backward"


class CorpusTooShort(ValueError):
    pass


class Exhausted(RuntimeError):
    pass


class UnknownStructure(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class NGramModel:
    order: int
    successors: dict  # prior tuple (order-1 slices) -> {slice: count}
    vocabulary: frozenset

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("order must be >= 2")
        # sorted successor tuples, computed once; searches hit this a lot
        object.__setattr__(self, "_sorted", {
            k: tuple(sorted(v)) for k, v in self.successors.items()})

    def successors_of(self, prior: Sequence[str]) -> tuple[str, ...]:
        return self._sorted.get(tuple(prior), ())

    def accepts(self, window: Sequence[str]) -> bool:
        """True if the last slice of ``window`` follows its first order-1 slices."""
        nexts = self.successors.get(tuple(window[:-1]))
        return nexts is not None and window[-1] in nexts

    def out_degrees(self) -> list[int]:
        return [len(v) for v in self.successors.values()]

    def to_json(self) -> dict:
        return {
            "schema": NGRAM_SCHEMA,
            "order": self.order,
            "successors": [
                [list(prior), dict(sorted(nexts.items()))]
                for prior, nexts in sorted(self.successors.items())
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "NGramModel":
        if d.get("schema") != NGRAM_SCHEMA:
            raise ValueError(f"unsupported model schema {d.get('schema')!r}")
        successors = {tuple(p): dict(n) for p, n in d["successors"]}
        vocab = set()
        for prior, nexts in successors.items():
            vocab.update(prior)
            vocab.update(nexts)
        return cls(d["order"], successors, frozenset(vocab))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NGramModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _slices(seq) -> tuple[str, ...]:
    return seq.slices if isinstance(seq, SliceSequence) else tuple(seq)


def train_ngram(corpus: Iterable[SliceSequence], order: int) -> NGramModel:
    counts: dict = defaultdict(Counter)
    vocab = set()
    for seq in corpus:
        slices = _slices(seq)
        if len(slices) < order:
            raise CorpusTooShort(f"sequence of {len(slices)} slices < order {order}")
        vocab.update(slices)
        for i in range(len(slices) - order + 1):
            counts[slices[i:i + order - 1]][slices[i + order - 1]] += 1
    return NGramModel(order, {k: dict(v) for k, v in counts.items()}, frozenset(vocab))


def is_generable(seq, model: NGramModel) -> bool:
    slices = _slices(seq)
    n = model.order
    if len(slices) < n:
        raise CorpusTooShort(f"sequence of {len(slices)} slices < order {n}")
    return all(model.accepts(slices[i:i + n]) for i in range(len(slices) - n + 1))


def windows_generable(slices: Sequence[str], model: NGramModel, lo: int, hi: int) -> bool:
    """Check only the windows whose last slice index lies in [lo, hi)."""
    n = model.order
    for end in range(max(lo, n - 1), min(hi, len(slices))):
        if not model.accepts(slices[end - n + 1:end + 1]):
            return False
    return True


def successors_of(prior: Sequence[str], model: NGramModel) -> tuple[str, ...]:
    return model.successors_of(prior)


def sample_segment(model: NGramModel, length: int, seed: int,
                   require: Callable[[SliceSequence], bool] | None = None,
                   orientation: str = "columns-left-to-right",
                   budget: int = 500) -> SliceSequence:
    """Random walk through the n-gram; retried until ``require`` accepts."""
    if length < model.order:
        raise ValueError("length must be >= model order")
    rng = random.Random(seed)
    priors = sorted(model.successors)
    # start where the training data starts its windows, weighted by frequency
    prior_weights = [sum(model.successors[p].values()) for p in priors]
    for _ in range(budget):
        out = list(rng.choices(priors, weights=prior_weights)[0])
        while len(out) < length:
            nexts = model.successors.get(tuple(out[-(model.order - 1):]))
            if not nexts:
                break
            keys = sorted(nexts)
            out.append(rng.choices(keys, weights=[nexts[k] for k in keys])[0])
        if len(out) < length:
            continue
        seq = SliceSequence(orientation, tuple(out))
        if require is None or require(seq):
            return seq
    raise Exhausted(f"no acceptable segment in {budget} attempts")


@dataclass(frozen=True, eq=False)
class StructureChain:
    direction: str
    max_context: int
    transitions: dict  # context run -> {completion run: count}

    def get(self, context: Sequence[str]) -> dict:
        return self.transitions.get(tuple(context), {})

    def to_json(self) -> dict:
        return {
            "schema": CHAIN_SCHEMA,
            "direction": self.direction,
            "max_context": self.max_context,
            "transitions": [
                [list(k), [[list(run), n] for run, n in sorted(v.items())]]
                for k, v in sorted(self.transitions.items())
            ],
        }

    @classmethod
    def from_json(cls, d: dict) -> "StructureChain":
        if d.get("schema") != CHAIN_SCHEMA:
            raise ValueError(f"unsupported chain schema {d.get('schema')!r}")
        trans = {tuple(k): {tuple(run): n for run, n in v} for k, v in d["transitions"]}
        return cls(d["direction"], d["max_context"], trans)


def _structure_runs(slices: Sequence[str], config: GameConfig) -> list[tuple[str, ...]]:
    runs, cur = [], []
    for s in slices:
        if has_structure(s, config):
            cur.append(s)
        elif cur:
            runs.append(tuple(cur))
            cur = []
    if cur:
        runs.append(tuple(cur))
    return runs


def _train_chain(corpus, config: GameConfig, direction: str) -> StructureChain:
    max_context = max(1, config.max_structure_extent)
    trans: dict = defaultdict(Counter)
    for seq in corpus:
        slices = _slices(seq)
        if direction == BACKWARD:
            slices = slices[::-1]
        for run in _structure_runs(slices, config):
            # every cut point i splits the run into seen context and completion;
            # i == len(run) records that the structure may end here
            for i in range(1, len(run) + 1):
                completion = run[i:]
                for c in range(1, min(max_context, i) + 1):
                    trans[run[i - c:i]][completion] += 1
    return StructureChain(direction, max_context, {k: dict(v) for k, v in trans.items()})


def train_structure_chains(corpus: Sequence[SliceSequence], config: GameConfig
                           ) -> tuple[StructureChain, StructureChain]:
    corpus = list(corpus)
    return (_train_chain(corpus, config, FORWARD), _train_chain(corpus, config, BACKWARD))


def structure_completions(chain: StructureChain, boundary: Sequence[str],
                          config: GameConfig) -> list[tuple[str, ...]]:
    """All completions for the longest matching context, best first.

    ``boundary`` is read in the chain's direction (for a backward chain,
    the reversed start of the end segment); results are in play order.
    """
    boundary = tuple(_slices(boundary))
    if not boundary or not has_structure(boundary[-1], config):
        return [()]
    best = None
    for c in range(1, min(chain.max_context, len(boundary)) + 1):
        options = chain.get(boundary[-c:])
        if not options:
            break
        best = options
    if best is None:
        raise UnknownStructure("trailing structure slice never seen in training")
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))
    runs = [run for run, _ in ranked]
    if chain.direction == BACKWARD:
        runs = [run[::-1] for run in runs]
    return runs


def complete_structure(chain: StructureChain, boundary: Sequence[str],
                       config: GameConfig) -> list[str]:
    return list(structure_completions(chain, boundary, config)[0])
