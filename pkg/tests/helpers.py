"""Small hand-made game configs and level builders shared by the tests."""

from __future__ import annotations

import itertools

from seglink.level import COLUMNS, ROWS, SliceSequence, config_from_dict


def micro_platformer(jump=2, lateral=1):
    return config_from_dict({
        "name": "micro-platformer",
        "orientation": COLUMNS,
        "tiles": {"-": ["empty"], "X": ["solid"], "E": ["enemy"], "T": ["passable-platform"]},
        "ngram_order": 2, "segment_length": 2, "link_search_max_depth": 2,
        "padding_slices": ["---XX"],
        "agent_params": {"kind": "platformer", "max_jump_height": jump,
                         "max_jump_horizontal": lateral},
        "behavior": ["linearity", "leniency"],
        "leniency_features": {"gap": 1, "enemy": 1},
    })


MICRO_PLATFORMER_SLICES = ["-----", "----X", "---XX", "--XXX", "-X--X", "---EX", "--T-X",
                           "-XXXX"]


def micro_vertical():
    return config_from_dict({
        "name": "micro-vertical",
        "orientation": ROWS,
        "tiles": {"-": ["empty"], "#": ["solid"], "T": ["passable-platform"],
                  "H": ["hazard"]},
        "ngram_order": 2, "segment_length": 2, "link_search_max_depth": 2,
        "padding_slices": ["TTTT", "----"], "padding_end_slices": ["TTTT", "----"],
        "agent_params": {"kind": "platformer", "max_jump_height": 2,
                         "max_jump_horizontal": 1, "allow_horizontal_wrap": True},
    })


MICRO_VERTICAL_SLICES = ["----", "TT--", "--TT", "####", "#--#", "T--T", "-HH-", "-T--"]


def micro_roguelike(stamina=6, gain=4, cap=7):
    return config_from_dict({
        "name": "micro-roguelike",
        "orientation": COLUMNS,
        "tiles": {"-": ["empty"], "X": ["solid"], "&": ["food"], "^": ["hazard"],
                  "e": ["enemy"], "*": ["switch"], "O": ["portal", "end-marker"],
                  "@": ["start-marker"]},
        "ngram_order": 2, "segment_length": 2, "link_search_max_depth": 2,
        "padding_slices": ["-@-"], "padding_end_slices": ["-O-"],
        "agent_params": {"kind": "roguelike", "start_stamina": stamina, "food_gain": gain,
                         "stamina_cap": cap},
    })


MICRO_ROGUELIKE_SLICES = ["---", "-&-", "X-X", "-e-", "*--", "X&X", "^--", "-XX"]


def micro_levels(config, slices, max_middle=4):
    """Every padded level with 1..max_middle middle slices drawn from ``slices``."""
    for n in range(1, max_middle + 1):
        for middle in itertools.product(slices, repeat=n):
            yield SliceSequence(config.orientation,
                                config.padding_start + middle + config.padding_end)


def columns(config, *cols: str) -> SliceSequence:
    return SliceSequence(config.orientation, cols)


def from_rows(config, text: str) -> SliceSequence:
    from seglink.level import parse_level, to_slices
    return to_slices(parse_level(text.strip("\n") + "\n", config), config)


def toy_config(order: int, max_depth: int):
    return config_from_dict({
        "name": "toy",
        "orientation": COLUMNS,
        "tiles": {"-": ["empty"], "X": ["solid"], "E": ["enemy"]},
        "ngram_order": order, "segment_length": order, "link_search_max_depth": max_depth,
        "padding_slices": ["-X"],
        "agent_params": {"kind": "platformer"},
        "behavior": ["linearity", "leniency"],
        "leniency_features": {"gap": 1, "enemy": 1},
    })


TOY_SLICES = ["--", "-X", "X-", "XX", "-E"]


def toy_agent(level, config, params=None):
    """Stand-in completability rule that any part of the level can flip.

    A level passes unless its solid-tile count is a multiple of three, which
    makes roughly a third of all fillings fail at arbitrary places.
    """
    from seglink.agents import AgentResult
    ok = sum(s.count("X") for s in level.slices) % 3 != 0
    return AgentResult(ok, 1.0 if ok else 0.0)
