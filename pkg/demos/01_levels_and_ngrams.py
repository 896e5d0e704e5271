#!/usr/bin/env python
# Levels as slice sequences, and the n-gram model trained on them.

# %%
from seglink.level import load_config, load_corpus, pad_level
from seglink.markov import is_generable, sample_segment, train_ngram
from seglink.render import render_text

mario = load_config("mario")
corpus = load_corpus(mario)
print(len(corpus), "training levels, slice height", corpus[0].slice_length)

# %%
# A Mario level is a list of columns read left to right.  Printing turns the
# slices back into rows.
print(render_text(corpus[0][:30]))

# %%
# The trigram model keeps, for every two-column prior, the columns seen next.
ngram = train_ngram(corpus, mario.ngram_order)
print(len(ngram.vocabulary), "distinct columns,", len(ngram.successors), "priors")

# %%
# Sampling a segment walks the model.  Any sampled segment is generable by
# construction: each of its windows occurs in the corpus.
seg = sample_segment(ngram, mario.segment_length, seed=1)
print(render_text(seg))
print("generable:", is_generable(seg, ngram))

# %%
# Icarus is vertical: its slices are rows, stored bottom to top.
icarus = load_config("icarus")
tower = load_corpus(icarus)[0]
print(icarus.orientation, len(tower), "rows")
print(render_text(pad_level(tower[:12], icarus)))
