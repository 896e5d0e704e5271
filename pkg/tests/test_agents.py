import pytest

from seglink import agents
from seglink.level import COLUMNS, ROWS, SliceSequence, load_config, pad_level

from helpers import (MICRO_PLATFORMER_SLICES, MICRO_ROGUELIKE_SLICES, MICRO_VERTICAL_SLICES,
                     micro_levels, micro_platformer, micro_roguelike, micro_vertical)
from oracles import (platformer_bfs, platformer_path_reaches_goal, replay_platformer,
                     replay_roguelike, roguelike_bfs)

GROUND = "-" * 12 + "XX"
AIR = "-" * 14


@pytest.fixture(scope="module")
def mario():
    return load_config("mario")


@pytest.fixture(scope="module")
def icarus():
    return load_config("icarus")


@pytest.fixture(scope="module")
def dg():
    return load_config("dungeongrams")


def mario_level(cfg, cols):
    return pad_level(SliceSequence(COLUMNS, tuple(cols)), cfg)


def test_flat_ground_is_completable(mario):
    res = agents.check(mario_level(mario, [GROUND] * 10), mario)
    assert res.completable and res.furthest_progress == 1.0
    assert res.path and res.nodes_expanded > 0


def test_wide_gap_is_not_completable(mario):
    res = agents.check(mario_level(mario, [GROUND] * 3 + [AIR] * 10 + [GROUND] * 3), mario)
    assert not res.completable
    assert 0 < res.furthest_progress < 1


def test_small_gap_and_pipe_are_completable(mario):
    pipe = ["-" * 9 + "<[[XX", "-" * 9 + ">]]XX"]
    level = mario_level(mario, [GROUND] * 2 + [AIR] * 3 + [GROUND] * 2 + pipe + [GROUND] * 2)
    res = agents.check(level, mario)
    assert res.completable
    assert replay_platformer(res.path, level, mario)


def test_enemy_tile_is_lethal(mario):
    wall = "-" * 3 + "E" * 9 + "XX"
    assert not agents.check(mario_level(mario, [GROUND, wall, GROUND]), mario).completable


def test_icarus_ladder_and_gap(icarus):
    ladder = ["T" * 16 if i % 3 == 2 else "-" * 16 for i in range(12)]
    level = pad_level(SliceSequence(ROWS, tuple(ladder)), icarus)
    res = agents.check(level, icarus)
    assert res.completable and replay_platformer(res.path, level, icarus)
    assert platformer_path_reaches_goal(res.path, level, icarus)

    start = ("T" * 16,) + ("-" * 16,) * 2
    end = ("T" * 16,) + ("-" * 16,) * 2
    gap = start + ("-" * 16,) * 4 + end
    assert not agents.check(pad_level(SliceSequence(ROWS, gap), icarus), icarus).completable
    designer = load_config("icarus-designer").linking_slices
    bridged = start + ("-" * 16, designer[1], "-" * 16, "-" * 16, designer[2], "-" * 16) + end
    assert agents.check(pad_level(SliceSequence(ROWS, bridged), icarus), icarus).completable


def test_icarus_platforms_can_be_jumped_through(icarus):
    # a solid ceiling blocks the climb, a passable platform does not
    floor, air = "T" * 16, "-" * 16
    through = (floor, air, air, "T" * 16, air, air)
    blocked = (floor, air, air, "#" * 16, air, air)
    assert agents.check(pad_level(SliceSequence(ROWS, through), icarus), icarus).completable
    assert not agents.check(pad_level(SliceSequence(ROWS, blocked), icarus), icarus).completable


def dg_corridor(n, food_at=None):
    cols = ["X--------X"] * n
    if food_at is not None:
        cols[food_at] = "X---&----X"
    return SliceSequence(COLUMNS, tuple(cols))


def test_roguelike_stamina_arithmetic(dg):
    # start at column 0 row 4, portal at the last column row 5: n + 4 moves
    short = pad_level(dg_corridor(30), dg)
    assert agents.check(short, dg).completable
    long = pad_level(dg_corridor(45), dg)
    assert not agents.check(long, dg).completable
    fed = pad_level(dg_corridor(45, food_at=20), dg)
    res = agents.check(fed, dg)
    assert res.completable and replay_roguelike(res.path, fed, dg)
    # the exact boundary: 36 empty columns is 40 moves, the last onto the portal
    assert agents.check(pad_level(dg_corridor(36), dg), dg).completable
    assert not agents.check(pad_level(dg_corridor(37), dg), dg).completable


def test_roguelike_switches_gate_the_portal(dg):
    cols = ["X--------X"] * 6
    cols[3] = "X-------*X"
    level = pad_level(SliceSequence(COLUMNS, tuple(cols)), dg)
    res = agents.check(level, dg)
    assert res.completable
    assert any(state[3] for state in res.path)  # switch bit set along the way
    walled = list(cols)
    walled[2] = "XXXXXXX-XX"
    walled[4] = "XXXXXXX-XX"
    walled[3] = "X------X*X"
    level = pad_level(SliceSequence(COLUMNS, tuple(walled)), dg)
    assert not agents.check(level, dg).completable


def test_roguelike_requires_a_goal(dg):
    with pytest.raises(agents.MalformedLevel):
        agents.check(dg_corridor(4), dg)


def test_initial_stamina_override(dg):
    level = pad_level(dg_corridor(20), dg)
    assert agents.roguelike_check(level, dg).completable
    assert not agents.roguelike_check(level, dg, initial_stamina=10).completable


def test_determinism(mario, dg):
    level = mario_level(mario, [GROUND] * 3 + [AIR] * 2 + [GROUND] * 3)
    assert agents.check(level, mario) == agents.check(level, mario)
    fed = pad_level(dg_corridor(45, food_at=20), dg)
    assert agents.check(fed, dg) == agents.check(fed, dg)


def test_node_budget_is_reported(mario):
    from dataclasses import replace
    params = replace(mario.agent_params, node_budget=5)
    res = agents.check(mario_level(mario, [GROUND] * 20), mario, params)
    assert not res.completable and res.budget_exhausted and res.nodes_expanded == 5


@pytest.mark.parametrize("make, slices, oracle", [
    (micro_platformer, MICRO_PLATFORMER_SLICES, platformer_bfs),
    (micro_vertical, MICRO_VERTICAL_SLICES, platformer_bfs),
    (micro_roguelike, MICRO_ROGUELIKE_SLICES, roguelike_bfs),
], ids=["platformer", "vertical", "roguelike"])
def test_agents_match_exhaustive_search_on_short_levels(make, slices, oracle):
    cfg = make()
    for level in micro_levels(cfg, slices, max_middle=3):
        want = oracle(level, cfg)
        assert agents.check(level, cfg).completable == want, level.slices
        assert agents.quick_check(level, cfg).completable == want, level.slices


def test_witness_paths_replay(mario):
    cfg = micro_platformer(jump=3, lateral=2)
    for level in micro_levels(cfg, MICRO_PLATFORMER_SLICES, max_middle=2):
        res = agents.check(level, cfg)
        assert replay_platformer(res.path, level, cfg)
        assert res.completable == platformer_path_reaches_goal(res.path, level, cfg)
    rcfg = micro_roguelike()
    for level in micro_levels(rcfg, MICRO_ROGUELIKE_SLICES, max_middle=2):
        res = agents.check(level, rcfg)
        assert replay_roguelike(res.path, level, rcfg)


def test_result_json(mario):
    res = agents.check(mario_level(mario, [GROUND] * 4), mario)
    d = res.to_json()
    assert d["completable"] and d["path"][0] == list(res.path[0])
    assert res.dump_path().startswith("[[")
