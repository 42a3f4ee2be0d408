"""Bilingual lexicon induction via IBM-Model-1-style EM.

A lexicon maps each source token to a probability distribution over
target tokens, p(target | source). The global lexicon is estimated on
the full training corpus; the context-aware variant re-runs EM on the
sub-corpus of pairs sharing at least one source token with the sentence
being translated.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import ParallelCorpus, SPECIAL_TOKENS

NULL_TOKEN = "<null>"

SUM_TOL = 1e-9
LOAD_SUM_TOL = 1e-6


class LexiconError(ValueError):
    """Raised for malformed lexicon files or invalid distributions."""


class Lexicon:
    """Per-source-token distributions over target tokens.

    Entries are stored sorted by descending probability, ties broken
    lexicographically; every distribution sums to 1 within 1e-9.
    """

    def __init__(self, entries: dict[str, Iterable[tuple[str, float]]]):
        self.entries: dict[str, tuple[tuple[str, float], ...]] = {}
        for src, cands in entries.items():
            cands = [(t, float(p)) for t, p in cands if p > 0.0]
            if not cands:
                continue
            total = sum(p for _, p in cands)
            if total <= 0.0:
                continue
            cands = [(t, p / total) for t, p in cands]
            cands.sort(key=lambda tp: (-tp[1], tp[0]))
            self.entries[src] = tuple(cands)

    def __contains__(self, src: str):
        return src in self.entries

    def __len__(self):
        return len(self.entries)

    def __bool__(self):
        return bool(self.entries)

    def get(self, src: str) -> tuple[tuple[str, float], ...]:
        return self.entries.get(src, ())

    def sources(self) -> list[str]:
        return sorted(self.entries)

    def restrict(self, tokens: Iterable[str]) -> "Lexicon":
        keep = set(tokens)
        return Lexicon({s: c for s, c in self.entries.items() if s in keep})

    def approx_equal(self, other: "Lexicon", tol: float = 1e-9) -> bool:
        if set(self.entries) != set(other.entries):
            return False
        for src, cands in self.entries.items():
            b = dict(other.entries[src])
            if set(t for t, _ in cands) != set(b):
                return False
            if any(abs(p - b[t]) > tol for t, p in cands):
                return False
        return True


@dataclass(frozen=True)
class EmConfig:
    """EM settings; initialization is always uniform."""

    iterations: int = 20
    additive_smoothing: float = 0.0
    null_word: bool = True
    init: str = "uniform"

    def __post_init__(self):
        if self.iterations < 1:
            raise LexiconError("iterations must be >= 1")
        if self.additive_smoothing < 0.0:
            raise LexiconError("additive_smoothing must be >= 0")
        if self.init != "uniform":
            raise LexiconError("only uniform initialization is supported")


class CooccurrenceIndex:
    """Inverted map: source token -> ids of pairs containing it."""

    def __init__(self, corpus: ParallelCorpus):
        self.by_token: dict[str, set[int]] = defaultdict(set)
        for pair in corpus:
            for tok in pair.source:
                self.by_token[tok].add(pair.id)
        self.by_token = dict(self.by_token)

    def pairs_for(self, token: str) -> set[int]:
        return self.by_token.get(token, set())


def ibm1_em_trace(corpus: ParallelCorpus, cfg: EmConfig) -> tuple[Lexicon, list[float]]:
    """Run EM and also return the per-iteration corpus log-likelihood.

    E-step: each target occurrence distributes a unit count over the
    co-occurring source tokens proportionally to the current t(tgt|src).
    M-step: renormalize counts per source token. Deterministic: uniform
    init, corpus order iteration, sorted M-step keys.
    """
    if len(corpus) == 0:
        raise LexiconError("cannot run EM on an empty corpus")
    bitext = []
    for pair in corpus:
        src = list(pair.source)
        if cfg.null_word:
            src = [NULL_TOKEN] + src
        bitext.append((src, list(pair.target)))

    cooc: dict[str, set[str]] = defaultdict(set)
    for src, tgt in bitext:
        for s in src:
            cooc[s].update(tgt)
    t = {}
    for s in sorted(cooc):
        u = 1.0 / len(cooc[s])
        for w in sorted(cooc[s]):
            t[(s, w)] = u

    lam = cfg.additive_smoothing
    logliks = []
    for _ in range(cfg.iterations):
        counts = defaultdict(float)
        totals = defaultdict(float)
        ll = 0.0
        for src, tgt in bitext:
            for w in tgt:
                denom = 0.0
                for s in src:
                    denom += t[(s, w)]
                ll += math.log(denom) - math.log(len(src))
                for s in src:
                    share = t[(s, w)] / denom
                    counts[(s, w)] += share
                    totals[s] += share
        for (s, w) in sorted(counts):
            n_targets = len(cooc[s])
            t[(s, w)] = (counts[(s, w)] + lam) / (totals[s] + lam * n_targets)
        if logliks and ll < logliks[-1] - 1e-9 * max(1.0, abs(logliks[-1])):
            raise LexiconError(
                "EM log-likelihood decreased: %.12g -> %.12g" % (logliks[-1], ll)
            )
        logliks.append(ll)

    entries: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for (s, w), p in t.items():
        if s != NULL_TOKEN and p > 0.0:
            entries[s].append((w, p))
    return Lexicon(entries), logliks


def ibm1_em(corpus: ParallelCorpus, cfg: EmConfig | None = None) -> Lexicon:
    """Estimate t(target | source) by EM over the full corpus."""
    lex, _ = ibm1_em_trace(corpus, cfg or EmConfig())
    return lex


def context_lexicon(
    src_tokens: Sequence[str],
    corpus: ParallelCorpus,
    idx: CooccurrenceIndex,
    cfg: EmConfig | None = None,
    max_pairs: int = 5000,
) -> Lexicon:
    """Lexicon from the sub-corpus sharing >= 1 source token with src_tokens.

    If the sub-corpus exceeds max_pairs, the pairs sharing the most
    distinct tokens are kept (ties: smaller pair id). Returns an empty
    lexicon when nothing overlaps; callers fall back to the global one.
    """
    query = {t for t in src_tokens if t not in SPECIAL_TOKENS}
    candidate_ids: set[int] = set()
    for tok in query:
        candidate_ids |= idx.pairs_for(tok)
    if not candidate_ids:
        return Lexicon({})
    if len(candidate_ids) > max_pairs:
        scored = sorted(
            candidate_ids,
            key=lambda pid: (-len(query & set(corpus[pid].source)), pid),
        )
        chosen = sorted(scored[:max_pairs])
    else:
        chosen = sorted(candidate_ids)
    sub = ParallelCorpus.from_token_pairs(
        [(corpus[pid].source, corpus[pid].target) for pid in chosen],
        name=corpus.name + "/context" if corpus.name else "context",
    )
    lex = ibm1_em(sub, cfg or EmConfig())
    return lex.restrict(query)


def prune_lexicon(lexicon: Lexicon, top_k: int, min_prob: float = 0.0) -> Lexicon:
    """Keep the top_k targets with p >= min_prob per source; renormalize."""
    if top_k < 1:
        raise LexiconError("top_k must be >= 1")
    if not 0.0 <= min_prob < 1.0:
        raise LexiconError("min_prob must be in [0,1)")
    out = {}
    for src, cands in lexicon.entries.items():
        kept = [(t, p) for t, p in cands if p >= min_prob][:top_k]
        if kept:
            out[src] = kept
    return Lexicon(out)


def save_lexicon(lexicon: Lexicon, path) -> None:
    """Write TSV `source<TAB>target<TAB>prob`, grouped by source,
    descending probability, 12 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for src in sorted(lexicon.entries):
            for tgt, p in lexicon.entries[src]:
                f.write("%s\t%s\t%.12g\n" % (src, tgt, p))


def load_lexicon(path) -> Lexicon:
    """Read a lexicon TSV; validates per-source sums within 1e-6."""
    raw: dict[str, list[tuple[str, float]]] = defaultdict(list)
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise LexiconError("%s line %d: expected 3 columns" % (path, lineno))
            src, tgt, prob_s = parts
            try:
                p = float(prob_s)
            except ValueError as exc:
                raise LexiconError(
                    "%s line %d: bad probability %r" % (path, lineno, prob_s)
                ) from exc
            if not 0.0 < p <= 1.0:
                raise LexiconError(
                    "%s line %d: probability %g outside (0,1]" % (path, lineno, p)
                )
            raw[src].append((tgt, p))
    for src, cands in raw.items():
        total = sum(p for _, p in cands)
        if abs(total - 1.0) > LOAD_SUM_TOL:
            raise LexiconError(
                "%s: probabilities for %r sum to %.9f, not 1" % (path, src, total)
            )
    return Lexicon(raw)
