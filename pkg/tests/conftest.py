import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from seglink.experiments import synthesize_segments  # noqa: E402
from seglink.level import load_config  # noqa: E402
from seglink.linking import GameModels  # noqa: E402

_MODELS: dict = {}
_SEGMENTS: dict = {}


def game_models(name: str) -> GameModels:
    """Models trained once per test session."""
    if name not in _MODELS:
        _MODELS[name] = GameModels.train(load_config(name))
    return _MODELS[name]


def game_segments(name: str, count: int, seed: int = 0):
    """Synthesized segments, shared across tests; larger requests extend smaller ones."""
    key = (name, seed)
    have = _SEGMENTS.get(key, [])
    if len(have) < count:
        have = synthesize_segments(game_models(name), count, seed)
        _SEGMENTS[key] = have
    return have[:count]


@pytest.fixture(autouse=True)
def _no_model_cache(monkeypatch):
    # tests train in memory unless they set the cache themselves
    monkeypatch.delenv("SEGLINK_CACHE", raising=False)
