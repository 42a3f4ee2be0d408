"""Parallel corpus ingestion, tokenization, vocabularies, and splits.

Corpora are two line-aligned UTF-8 text files, one pre-tokenized sentence
per line, tokens separated by spaces. Vocabularies reserve ids 0-3 for
PAD/BOS/EOS/UNK and assign the rest by descending frequency.
"""

from __future__ import annotations

import math
import random
import string
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN = "<pad>", "<s>", "</s>", "<unk>"
SPECIAL_TOKENS = (PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN)

_ASCII_PUNCT = set(string.punctuation)


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid corpus operations."""


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair; both sides are non-empty token tuples."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    id: int

    def __post_init__(self):
        if not self.source or not self.target:
            raise CorpusError("sentence pair %d has an empty side" % self.id)
        if self.id < 0:
            raise CorpusError("pair id must be non-negative")


class ParallelCorpus:
    """An ordered collection of sentence pairs with ids 0..len-1."""

    def __init__(self, pairs: Sequence[SentencePair], name: str = ""):
        for i, p in enumerate(pairs):
            if p.id != i:
                raise CorpusError(
                    "pair ids must be 0..len-1 in order (pair %d has id %d)" % (i, p.id)
                )
        self.pairs = tuple(pairs)
        self.name = name

    @classmethod
    def from_token_pairs(cls, token_pairs, name: str = "") -> "ParallelCorpus":
        """Build a corpus from (source_tokens, target_tokens) sequences."""
        pairs = [
            SentencePair(tuple(src), tuple(tgt), i)
            for i, (src, tgt) in enumerate(token_pairs)
        ]
        return cls(pairs, name)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def __eq__(self, other):
        if not isinstance(other, ParallelCorpus):
            return NotImplemented
        return self.pairs == other.pairs

    def source_sentences(self) -> list[tuple[str, ...]]:
        return [p.source for p in self.pairs]

    def target_sentences(self) -> list[tuple[str, ...]]:
        return [p.target for p in self.pairs]


def tokenize(text: str, split_punct: bool = False) -> list[str]:
    """Split on Unicode whitespace; never returns empty tokens.

    With split_punct, leading/trailing ASCII punctuation characters are
    peeled off each whitespace token as standalone tokens.
    """
    raw = text.split()
    if not split_punct:
        return raw
    out: list[str] = []
    for tok in raw:
        head: list[str] = []
        tail: list[str] = []
        while tok and tok[0] in _ASCII_PUNCT:
            head.append(tok[0])
            tok = tok[1:]
        while tok and tok[-1] in _ASCII_PUNCT:
            tail.append(tok[-1])
            tok = tok[:-1]
        out.extend(head)
        if tok:
            out.append(tok)
        out.extend(reversed(tail))
    return out


def _read_lines(path) -> list[str]:
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(
            "%s: invalid UTF-8 at byte offset %d" % (path, exc.start)
        ) from exc
    if text.endswith("\n"):
        text = text[:-1]
    return text.split("\n") if text else []


def load_parallel(source_path, target_path, name: str = "") -> ParallelCorpus:
    """Load a line-aligned pair of token files into a ParallelCorpus."""
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise CorpusError(
            "line counts differ: %d ≠ %d (%s vs %s)"
            % (len(src_lines), len(tgt_lines), source_path, target_path)
        )
    pairs = []
    for i, (s, t) in enumerate(zip(src_lines, tgt_lines)):
        src_toks = tokenize(s)
        tgt_toks = tokenize(t)
        if not src_toks:
            raise CorpusError("%s: empty line %d" % (source_path, i + 1))
        if not tgt_toks:
            raise CorpusError("%s: empty line %d" % (target_path, i + 1))
        pairs.append(SentencePair(tuple(src_toks), tuple(tgt_toks), i))
    if not name:
        name = Path(source_path).stem
    return ParallelCorpus(pairs, name)


def save_parallel(corpus: ParallelCorpus, source_path, target_path) -> None:
    """Write a corpus back to two aligned, LF-terminated token files."""
    with open(source_path, "w", encoding="utf-8", newline="\n") as fs:
        for p in corpus:
            fs.write(" ".join(p.source) + "\n")
    with open(target_path, "w", encoding="utf-8", newline="\n") as ft:
        for p in corpus:
            ft.write(" ".join(p.target) + "\n")


class Vocabulary:
    """Bidirectional token<->id map with counts and reserved specials.

    Ids 0-3 are PAD/BOS/EOS/UNK. Remaining ids are assigned by descending
    count, ties broken lexicographically. Corpus tokens spelled exactly
    like a special surface form are folded into that special.
    """

    def __init__(self, tokens_with_counts: Sequence[tuple[str, int]]):
        self.id_to_token: list[str] = list(SPECIAL_TOKENS)
        self.counts: dict[str, int] = {t: 0 for t in SPECIAL_TOKENS}
        for tok, cnt in tokens_with_counts:
            if tok in self.counts:
                raise CorpusError("duplicate vocabulary token %r" % tok)
            self.id_to_token.append(tok)
            self.counts[tok] = cnt
        self.token_to_id: dict[str, int] = {
            t: i for i, t in enumerate(self.id_to_token)
        }

    @classmethod
    def build(cls, sentences: Iterable, min_count: int = 1) -> "Vocabulary":
        """Count tokens over sentences (strings or token sequences)."""
        if min_count < 1:
            raise CorpusError("min_count must be >= 1")
        counts: Counter = Counter()
        for sent in sentences:
            toks = sent.split() if isinstance(sent, str) else sent
            counts.update(t for t in toks if t not in SPECIAL_TOKENS)
        kept = [(t, c) for t, c in counts.items() if c >= min_count]
        kept.sort(key=lambda tc: (-tc[1], tc[0]))
        return cls(kept)

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token: str):
        return token in self.token_to_id

    def id(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token(self, idx: int) -> str:
        return self.id_to_token[idx]

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self.id_to_token == other.id_to_token and self.counts == other.counts

    def save(self, path) -> None:
        """Write TSV rows `token<TAB>id<TAB>count`, specials included."""
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for i, tok in enumerate(self.id_to_token):
                f.write("%s\t%d\t%d\n" % (tok, i, self.counts[tok]))

    @classmethod
    def load(cls, path) -> "Vocabulary":
        rows = []
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise CorpusError("%s line %d: expected 3 columns" % (path, lineno))
                tok, idx, cnt = parts[0], int(parts[1]), int(parts[2])
                rows.append((idx, tok, cnt))
        rows.sort()
        for want, (idx, _, _) in enumerate(rows):
            if idx != want:
                raise CorpusError("%s: ids are not contiguous from 0" % path)
        if [t for _, t, _ in rows[:4]] != list(SPECIAL_TOKENS):
            raise CorpusError("%s: ids 0-3 must be the special tokens" % path)
        vocab = cls([(t, c) for _, t, c in rows[4:]])
        return vocab


def build_vocabulary(sentences: Iterable, min_count: int = 1) -> Vocabulary:
    return Vocabulary.build(sentences, min_count)


def encode_sentence(
    tokens: Sequence[str], vocab: Vocabulary, add_bounds: bool = False
) -> list[int]:
    """Map surface forms to ids (UNK for unseen); optionally wrap BOS/EOS.

    Callers that need the lexicon/phrase path keep the surface forms
    alongside these ids; unseen tokens stay addressable by surface even
    though their embedding id is UNK.
    """
    ids = [vocab.id(t) for t in tokens]
    if add_bounds:
        return [BOS_ID] + ids + [EOS_ID]
    return ids


def decode_ids(
    ids: Sequence[int], vocab: Vocabulary, strip_specials: bool = True
) -> list[str]:
    toks = [vocab.token(i) for i in ids]
    if strip_specials:
        toks = [t for t in toks if t not in SPECIAL_TOKENS]
    return toks


@dataclass(frozen=True)
class SplitSpec:
    """Fractions and seed for the deterministic train/dev/test split."""

    test_fraction: float = 0.2
    dev_fraction_of_rest: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise CorpusError("test_fraction must be in (0,1)")
        if not 0.0 < self.dev_fraction_of_rest < 1.0:
            raise CorpusError("dev_fraction_of_rest must be in (0,1)")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_corpus(
    corpus: ParallelCorpus, spec: SplitSpec
) -> tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """Deterministic shuffle-and-partition into (train, dev, test).

    Sizes: test = round(N*test_fraction), dev = round((N-test)*dev_fraction),
    train = remainder; rounding is half-up. Each split is reindexed 0..len-1.
    """
    n = len(corpus)
    if n < 10:
        raise CorpusError("corpus too small to split (%d pairs, need >= 10)" % n)
    order = list(range(n))
    random.Random(spec.seed).shuffle(order)
    n_test = _round_half_up(n * spec.test_fraction)
    n_dev = _round_half_up((n - n_test) * spec.dev_fraction_of_rest)
    test_idx = order[:n_test]
    dev_idx = order[n_test : n_test + n_dev]
    train_idx = order[n_test + n_dev :]

    def take(indices, label):
        return ParallelCorpus.from_token_pairs(
            [(corpus[i].source, corpus[i].target) for i in indices],
            name=(corpus.name + "/" + label) if corpus.name else label,
        )

    return take(train_idx, "train"), take(dev_idx, "dev"), take(test_idx, "test")


def oov_rate(sentences: Iterable, vocab: Vocabulary) -> float:
    """Fraction of token occurrences absent from the vocabulary.

    Tokens spelled like special surface forms are excluded from both the
    numerator and the denominator.
    """
    total = 0
    unseen = 0
    for sent in sentences:
        toks = sent.split() if isinstance(sent, str) else sent
        for t in toks:
            if t in SPECIAL_TOKENS:
                continue
            total += 1
            if t not in vocab:
                unseen += 1
    if total == 0:
        raise CorpusError("oov_rate is undefined on an empty input")
    return unseen / total
