import numpy as np
import pytest

from noov.corpus import ParallelCorpus, Vocabulary
from noov.model import ModelConfig, NoovModel


def write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


@pytest.fixture
def toy_corpus():
    return ParallelCorpus.from_token_pairs(
        [
            ("the house".split(), "das haus".split()),
            ("the book".split(), "das buch".split()),
            ("a book".split(), "ein buch".split()),
        ],
        "toy",
    )


def substitution_corpus(n_pairs, seed, n_words=12, min_len=3, max_len=9,
                        permute_count=0):
    """Invertible word-substitution toy language.

    permute_count > 0 cycles that many target words, leaving the rest of
    the mapping unchanged (a related language with overlapping vocabulary).
    """
    rng = np.random.default_rng(seed)
    src_words = ["s%d" % i for i in range(n_words)]
    tgt_words = ["t%d" % i for i in range(n_words)]
    if permute_count:
        head = tgt_words[:permute_count]
        tgt_words = head[1:] + head[:1] + tgt_words[permute_count:]
    mapping = dict(zip(src_words, tgt_words))
    pairs = []
    for _ in range(n_pairs):
        n = int(rng.integers(min_len, max_len))
        src = [src_words[int(i)] for i in rng.integers(0, n_words, size=n)]
        pairs.append((src, [mapping[w] for w in src]))
    return ParallelCorpus.from_token_pairs(pairs, "subst")


def tiny_model(hidden=6, layers=2, seed=0, dropout=0.0, dtype=np.float32,
               src_words=("a", "b", "c"), tgt_words=("x", "y", "z"), **kwargs):
    sv = Vocabulary([(w, 1) for w in src_words])
    tv = Vocabulary([(w, 1) for w in tgt_words])
    cfg = ModelConfig(hidden_size=hidden, layers=layers, batch_size=4,
                      dropout=dropout, seed=seed, **kwargs)
    return NoovModel.create(cfg, sv, tv, dtype=dtype)
