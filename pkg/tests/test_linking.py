import random

import pytest

from seglink import behavior
from seglink.level import COLUMNS, ROWS, SliceSequence, find_broken_structures, load_config
from seglink.linking import (BC_MATCH, BC_MATCH_REQUIRED, DESIGNER_DEFINED, LINKED, NO_LINK, NULL,
                             SHORTEST, STRUCTURE_FAILURE, GameModels, LinkingSliceSet,
                             LinkRequest, assemble, bc_match_link, build_link, chain_segments,
                             connect_priors, null_link, shortest_link)
from seglink.markov import windows_generable

from helpers import TOY_SLICES, toy_agent, toy_config
from oracles import all_fillings, grams_of, toy_corpus, windows_ok


def h(k):
    return "-" * (14 - k) + "X" * k


STAIRS = [h(2)] * 3 + [h(k) for k in range(3, 11)] + [h(11)] * 3


@pytest.fixture(scope="module")
def mario_models():
    return GameModels.train(load_config("mario"))


@pytest.fixture(scope="module")
def stair_models():
    cfg = load_config("mario")
    return GameModels.train(cfg, [SliceSequence(COLUMNS, tuple(STAIRS))])


def seq(*cols):
    return SliceSequence(COLUMNS, cols)


def test_connect_priors_enumerates_every_generable_filling():
    for g in range(30):
        rng = random.Random(g)
        alphabet = rng.sample(TOY_SLICES, rng.randint(2, 5))
        order = rng.choice([2, 3])
        corpus = toy_corpus(rng, alphabet, order)
        cfg = toy_config(order, 3)
        models = GameModels.train(cfg, [SliceSequence(COLUMNS, tuple(c)) for c in corpus])
        grams = grams_of(corpus, order)
        left, right = corpus[0][-3:], corpus[1][:3]
        k = order - 1
        want = [m for m in all_fillings(models.ngram.vocabulary, 3)
                if windows_ok(tuple(left[-k:]) + m + tuple(right[:k]), order, grams)]
        got = list(connect_priors(left, right, models.ngram, models.linking, 3))
        assert got == want


def test_null_link(mario_models):
    a = seq(*[h(2)] * 5)
    r = null_link(LinkRequest(a, a, NULL), mario_models)
    assert r.status == LINKED and r.linker == () and r.d_bc == 0.0 and r.rmse is None
    assert r.completable and r.unbroken


def test_depth_limit_fixture(stair_models):
    start, end = seq(*[h(2)] * 3), seq(*[h(11)] * 3)
    shallow = build_link(LinkRequest(start, end, SHORTEST, max_depth=6), stair_models)
    assert shallow.status == NO_LINK
    deep = build_link(LinkRequest(start, end, SHORTEST, max_depth=8), stair_models)
    assert deep.status == LINKED and deep.success
    assert deep.linker == tuple(h(k) for k in range(3, 11))
    assert deep.generable and deep.unbroken and deep.usable


def test_shortest_link_repairs_a_gap(mario_models):
    cfg = mario_models.config
    gap = "-" * 14
    start = seq(h(2), h(2), gap, gap, gap)
    end = seq(gap, gap, gap, h(2), h(2))
    assert not null_link(LinkRequest(start, end, NULL), mario_models).completable
    r = shortest_link(LinkRequest(start, end), mario_models)
    assert r.status == LINKED and r.success and r.usable
    assert len(r.linker) <= cfg.link_search_max_depth
    # every trigram window that touches the linker was seen in training
    full = start.slices + r.full_linker + end.slices
    lo, hi = len(start), len(start) + len(r.full_linker) + 2
    assert windows_generable(full, mario_models.ngram, lo, hi)


def test_bc_match_never_scores_worse_than_shortest(mario_models):
    gap = "-" * 14
    start = seq(h(2), h(2), gap)
    end = seq(gap, h(2), h(2))
    s = build_link(LinkRequest(start, end, SHORTEST), mario_models)
    b = build_link(LinkRequest(start, end, BC_MATCH), mario_models)
    assert s.success and b.success
    assert b.rmse <= s.rmse
    direct = bc_match_link(LinkRequest(start, end, BC_MATCH), mario_models)
    assert direct.linker == b.linker


def test_structure_completion_closes_a_cut_pipe(mario_models):
    cfg = mario_models.config
    start = seq(h(2), h(2), "-" * 9 + "<[[XX")
    end = seq("-" * 10 + ">]XX", h(2), h(2))
    r = build_link(LinkRequest(start, end, SHORTEST), mario_models)
    assert r.status == LINKED and r.success
    assert r.structure_prefix and r.structure_suffix
    level = SliceSequence(COLUMNS, start.slices + r.full_linker + end.slices)
    assert find_broken_structures(level, cfg) == []
    assert r.unbroken


def test_unseen_structure_is_reported(mario_models):
    # a half pipe of a height never seen in training cannot be completed
    odd = seq(h(2), h(2), "-" * 4 + "<" + "[" * 7 + "XX")
    r = build_link(LinkRequest(odd, seq(h(2), h(2)), SHORTEST), mario_models)
    assert r.status == STRUCTURE_FAILURE and not r.success
    assert "never seen" in r.search_stats["error"]


def test_designer_linking_slices_skip_the_ngram():
    cfg = load_config("icarus-designer")
    models = GameModels.train(cfg)
    assert models.linking.source == DESIGNER_DEFINED and not models.linking.requires_ngram
    floor, air = "T" * 16, "-" * 16
    start = SliceSequence(ROWS, (floor, air, air))
    end = SliceSequence(ROWS, (air, floor, air))
    gap_end = SliceSequence(ROWS, (air, air, air, floor, air))
    r = build_link(LinkRequest(start, gap_end, SHORTEST), models)
    assert r.status == LINKED and r.success
    assert set(r.linker) <= set(cfg.linking_slices)
    assert r.usable == (r.completable and r.unbroken)
    assert build_link(LinkRequest(start, end, SHORTEST), models).success


def test_required_tag_forces_food_into_the_linker():
    cfg = load_config("dungeongrams")
    models = GameModels.train(cfg)
    plain = "X--------X"
    start = seq(plain, plain, plain)
    r = build_link(LinkRequest(start, start, BC_MATCH_REQUIRED, required_tag="food"), models)
    assert r.status == LINKED
    assert r.linker and any("&" in s for s in r.linker)
    free = build_link(LinkRequest(start, start, BC_MATCH), models)
    assert free.success and not any("&" in s for s in free.linker)


def test_default_linking_set_is_structure_free():
    cfg = load_config("mario")
    models = GameModels.train(cfg)
    assert not any(set(s) & set("<>[]") for s in models.linking.slices)
    assert LinkingSliceSet.default({"--", "-<"}, cfg).slices == ("--",)


def test_request_validation():
    with pytest.raises(ValueError):
        LinkRequest(seq(h(2)), seq(h(2)), "teleport")


def test_toy_search_uses_the_supplied_agent():
    rng = random.Random(5)
    corpus = toy_corpus(rng, TOY_SLICES, 2)
    cfg = toy_config(2, 4)
    models = GameModels.train(cfg, [SliceSequence(COLUMNS, tuple(c)) for c in corpus])
    start = SliceSequence(COLUMNS, tuple(corpus[0][:4]))
    end = SliceSequence(COLUMNS, tuple(corpus[1][-4:]))
    r = build_link(LinkRequest(start, end, SHORTEST, max_depth=4), models, toy_agent)
    assert r.status == LINKED
    level = SliceSequence(COLUMNS, cfg.padding_start + start.slices + r.linker
                          + end.slices + cfg.padding_end)
    assert toy_agent(level, cfg).completable


def test_chain_segments_assembles_in_order(mario_models):
    gap = "-" * 14
    segs = [seq(h(2), h(2), gap), seq(gap, h(2), h(2)), seq(h(2), gap, h(2))]
    chain = chain_segments(segs, mario_models, SHORTEST)
    assert chain.linkable and chain.completable
    level, extents = assemble(segs, chain.per_pair, mario_models.config)
    assert level == chain.level and extents == chain.linker_extents
    for (lo, hi), link in zip(extents, chain.per_pair):
        assert level.slices[lo:hi] == link.full_linker
    with pytest.raises(ValueError):
        chain_segments(segs[:1], mario_models)


def test_link_result_json(mario_models):
    a = seq(h(2), h(2), h(2))
    d = build_link(LinkRequest(a, a, SHORTEST), mario_models).to_json()
    assert d["status"] == LINKED and d["full_linker_length"] == len(d["linker"])
    assert behavior.d_bc(a, a, mario_models.config) == 0.0
