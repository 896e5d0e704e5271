import pytest

from seglink.level import COLUMNS, SliceSequence, find_broken_structures, load_config, load_corpus
from seglink.markov import (BACKWARD, FORWARD, CorpusTooShort, Exhausted, NGramModel,
                            StructureChain, UnknownStructure, complete_structure, is_generable,
                            sample_segment, structure_completions, train_ngram,
                            train_structure_chains, windows_generable)


def seq(*s):
    return SliceSequence(COLUMNS, s)


def test_trigram_counts_and_generability():
    m = train_ngram([seq("a", "b", "c", "a", "b", "d")], 3)
    assert m.successors[("a", "b")] == {"c": 1, "d": 1}
    assert m.successors_of(("a", "b")) == ("c", "d")
    assert m.vocabulary == frozenset("abcd")
    assert is_generable(seq("b", "c", "a", "b", "d"), m)
    assert not is_generable(seq("a", "b", "a"), m)
    with pytest.raises(CorpusTooShort):
        is_generable(seq("a", "b"), m)
    with pytest.raises(CorpusTooShort):
        train_ngram([seq("a")], 2)


def test_windows_generable_checks_only_the_range():
    m = train_ngram([seq("a", "b", "c")], 2)
    slices = ("a", "b", "a", "b", "c")
    assert not is_generable(slices, m)
    assert windows_generable(slices, m, 3, 5)
    assert not windows_generable(slices, m, 0, 5)


def test_json_round_trip(tmp_path):
    m = train_ngram([seq("a", "b", "c", "a", "b", "d")], 3)
    path = tmp_path / "m.json"
    m.save(path)
    back = NGramModel.load(path)
    assert back.successors == m.successors and back.order == 3
    assert back.vocabulary == m.vocabulary
    with pytest.raises(ValueError):
        NGramModel.from_json({"schema": "other"})


def test_sampling_is_seeded_and_generable():
    cfg = load_config("mario")
    m = train_ngram(load_corpus(cfg), 3)
    a = sample_segment(m, 25, seed=7)
    b = sample_segment(m, 25, seed=7)
    assert a == b and len(a) == 25
    assert is_generable(a, m)
    with pytest.raises(Exhausted):
        sample_segment(m, 25, seed=7, require=lambda s: False, budget=3)


def test_structure_chain_completes_a_cut_pipe():
    cfg = load_config("mario")
    corpus = load_corpus(cfg)
    fwd, bwd = train_structure_chains(corpus, cfg)
    assert fwd.direction == FORWARD and bwd.direction == BACKWARD
    ground = "-" * 12 + "XX"
    pipe_cols = [s for lv in corpus for s in lv.slices if "<" in s]
    left = pipe_cols[0]
    completion = complete_structure(fwd, (ground, left), cfg)
    assert completion and completion[0].count(">") == 1
    whole = seq(ground, left, *completion, ground)
    assert find_broken_structures(whole, cfg) == []
    # backward chain: the end segment starts with a right pipe half
    right = completion[0]
    before = structure_completions(bwd, (right,), cfg)[0]
    assert find_broken_structures(seq(ground, *before, right, ground), cfg) == []
    # a boundary with no structure needs nothing
    assert structure_completions(fwd, (ground,), cfg) == [()]


def test_unseen_structure_context():
    cfg = load_config("mario")
    chain = StructureChain(FORWARD, 2, {})
    with pytest.raises(UnknownStructure):
        structure_completions(chain, ("-" * 10 + "<[XX",), cfg)
    back = StructureChain.from_json(train_structure_chains(load_corpus(cfg), cfg)[0].to_json())
    assert back.transitions
