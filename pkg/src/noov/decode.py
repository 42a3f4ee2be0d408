"""Lexicon-biased beam search with repetition repair.

Each decoding step mixes the decoder's softmax with an attention-weighted
lexicon distribution (alpha * lexicon + (1-alpha) * decoder). When the
step's argmax would repeat the previously emitted token, the phrase
table supplies the continuation of the longest matching source phrase
instead, keeping the original argmax's probability mass.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .align import CooccurrenceIndex, EmConfig, Lexicon, context_lexicon
from .corpus import BOS_ID, EOS_ID, SPECIAL_TOKENS, Vocabulary, encode_sentence
from .model import DecoderState, NoovModel
from .phrasebook import PhraseTable, continuation, find_match

MIX_SUM_TOL = 1e-6
LEXICON_MODES = ("global", "context", "context_backoff_global")
RENORMALIZE_MODES = ("softmax", "none")
REPETITION_TRIGGERS = ("output", "attention")


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class DecodeConfig:
    beam_size: int = 8
    alpha: float = 0.2
    max_len: int | None = None  # None: 2.5 * source length + 5
    renormalize_lexicon: str = "softmax"
    lexicon_mode: str = "context_backoff_global"
    repetition_fix: bool = True
    repetition_trigger: str = "output"

    def __post_init__(self):
        if self.beam_size < 1:
            raise DecodeError("beam_size must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise DecodeError("alpha must be in [0,1]")
        if self.max_len is not None and self.max_len < 1:
            raise DecodeError("max_len must be >= 1")
        if self.renormalize_lexicon not in RENORMALIZE_MODES:
            raise DecodeError("renormalize_lexicon must be one of %s" % (RENORMALIZE_MODES,))
        if self.lexicon_mode not in LEXICON_MODES:
            raise DecodeError("lexicon_mode must be one of %s" % (LEXICON_MODES,))
        if self.repetition_trigger not in REPETITION_TRIGGERS:
            raise DecodeError("repetition_trigger must be one of %s" % (REPETITION_TRIGGERS,))

    def step_limit(self, source_len: int) -> int:
        if self.max_len is not None:
            return self.max_len
        return int(2.5 * source_len + 5)


@dataclass
class BiasResult:
    """Lexicon bias over the target vocabulary; `neutral` marks the
    uniform fallback used when the lexicon had nothing to contribute."""

    dist: np.ndarray
    neutral: bool
    raw: np.ndarray  # attention-weighted sums before renormalization


def lexicon_bias_distribution(
    att: np.ndarray,
    src_tokens,
    lexicon: Lexicon,
    tgt_vocab: Vocabulary,
    renormalize: str = "softmax",
) -> BiasResult:
    """Scatter attention-weighted lexicon rows into the target vocabulary.

    pr[k] = sum_j att_j * p(target_k | source_j); targets missing from the
    vocabulary accumulate into UNK. With renormalize="softmax" the result
    is exp-normalized over the nonzero support (the aggregated remainder
    cell is dropped and the support renormalized, so out-of-support
    tokens get 0); "none" renormalizes pr linearly. An empty support
    yields a uniform neutral distribution, flagged in the result.
    """
    if renormalize not in RENORMALIZE_MODES:
        raise DecodeError("renormalize must be one of %s" % (RENORMALIZE_MODES,))
    if len(att) != len(src_tokens):
        raise DecodeError(
            "attention length %d does not match source length %d"
            % (len(att), len(src_tokens))
        )
    size = len(tgt_vocab)
    pr = np.zeros(size, dtype=np.float64)
    for j, tok in enumerate(src_tokens):
        weight = float(att[j])
        if weight == 0.0:
            continue
        for tgt, p in lexicon.get(tok):
            pr[tgt_vocab.id(tgt)] += weight * p
    support = np.flatnonzero(pr > 0.0)
    if support.size == 0:
        return BiasResult(np.full(size, 1.0 / size), True, pr)
    dist = np.zeros(size, dtype=np.float64)
    if renormalize == "softmax":
        vals = pr[support]
        e = np.exp(vals - vals.max())
        dist[support] = e / e.sum()
    else:
        dist[support] = pr[support] / pr[support].sum()
    return BiasResult(dist, False, pr)


def mix_distributions(decoder_dist: np.ndarray, lexicon_dist: np.ndarray,
                      alpha: float) -> np.ndarray:
    """output = alpha * lexicon + (1 - alpha) * decoder."""
    if not 0.0 <= alpha <= 1.0:
        raise DecodeError("alpha must be in [0,1]")
    decoder_dist = np.asarray(decoder_dist, dtype=np.float64)
    lexicon_dist = np.asarray(lexicon_dist, dtype=np.float64)
    if decoder_dist.shape != lexicon_dist.shape:
        raise DecodeError("distribution shapes differ")
    for name, d in (("decoder", decoder_dist), ("lexicon", lexicon_dist)):
        if abs(float(d.sum()) - 1.0) > MIX_SUM_TOL:
            raise DecodeError("%s distribution does not sum to 1" % name)
    return alpha * lexicon_dist + (1.0 - alpha) * decoder_dist


@dataclass
class Hypothesis:
    """Beam-search state for one partial translation."""

    token_ids: list[int] = field(default_factory=list)
    surfaces: list[str] = field(default_factory=list)
    logps: list[float] = field(default_factory=list)
    score: float = 0.0
    state: DecoderState | None = None
    prev_att_argmax: int | None = None
    finished: bool = False
    substitutions: list[tuple[int, int]] = field(default_factory=list)

    @property
    def prev_token(self) -> str | None:
        return self.surfaces[-1] if self.surfaces else None

    @property
    def prev_id(self) -> int:
        return self.token_ids[-1] if self.token_ids else BOS_ID

    def output_tokens(self) -> list[str]:
        return [s for s in self.surfaces if s not in SPECIAL_TOKENS]

    def normalized_score(self) -> float:
        return self.score / max(1, len(self.logps))


def detect_repetition(hyp: Hypothesis, next_argmax: str) -> bool:
    """True iff the step's argmax equals the previously emitted token
    (surface equality; special tokens never count)."""
    prev = hyp.prev_token
    if prev is None or prev in SPECIAL_TOKENS or next_argmax in SPECIAL_TOKENS:
        return False
    return prev == next_argmax


def phrase_substitute(hyp: Hypothesis, src_tokens, table: PhraseTable) -> str | None:
    """Continuation of the longest phrase matching (previous token,
    source sentence); None when no usable entry exists."""
    trigger = hyp.prev_token
    if trigger is None or table is None:
        return None
    match = find_match(src_tokens, trigger, table)
    if match is None:
        return None
    token = continuation(match, table)
    if token is None or token == trigger:
        return None
    return token


class LexiconProvider:
    """Supplies the per-sentence lexicon according to lexicon_mode."""

    def __init__(self, mode: str = "context_backoff_global",
                 global_lexicon: Lexicon | None = None,
                 corpus=None, index: CooccurrenceIndex | None = None,
                 em_config: EmConfig | None = None, max_pairs: int = 5000):
        if mode not in LEXICON_MODES:
            raise DecodeError("lexicon_mode must be one of %s" % (LEXICON_MODES,))
        if mode != "global" and corpus is None:
            raise DecodeError("lexicon_mode %r requires a context corpus" % mode)
        self.mode = mode
        self.global_lexicon = global_lexicon or Lexicon({})
        self.corpus = corpus
        if index is not None:
            self.index = index
        elif corpus is not None:
            self.index = CooccurrenceIndex(corpus)
        else:
            self.index = None
        self.em_config = em_config or EmConfig()
        self.max_pairs = max_pairs

    @classmethod
    def empty(cls) -> "LexiconProvider":
        return cls(mode="global", global_lexicon=Lexicon({}))

    def for_sentence(self, src_tokens) -> Lexicon:
        if self.mode == "global":
            return self.global_lexicon
        ctx = context_lexicon(src_tokens, self.corpus, self.index,
                              self.em_config, self.max_pairs)
        if self.mode == "context":
            return ctx
        merged = {}
        for tok in set(src_tokens):
            cands = ctx.get(tok) or self.global_lexicon.get(tok)
            if cands:
                merged[tok] = cands
        return Lexicon(merged)


@dataclass
class DecodeResult:
    best: Hypothesis
    nbest: list[Hypothesis]


def _expand(model: NoovModel, hyp: Hypothesis, enc, src_tokens, lexicon,
            table, cfg: DecodeConfig, width: int) -> list[Hypothesis]:
    """All scored extensions of one live hypothesis (top `width` tokens)."""
    dist, att, new_state = model.decode_step(hyp.state, hyp.prev_id, enc)
    if cfg.alpha > 0.0:
        bias = lexicon_bias_distribution(att, src_tokens, lexicon,
                                         model.tgt_vocab, cfg.renormalize_lexicon)
        mixed = mix_distributions(dist, bias.dist, cfg.alpha)
    else:
        mixed = np.asarray(dist, dtype=np.float64)
    order = np.argsort(-mixed, kind="stable")[:width]
    att_argmax = int(np.argmax(att))
    extensions = []
    for tid in order:
        p = float(mixed[tid])
        if p <= 0.0:
            continue
        extensions.append([int(tid), model.tgt_vocab.token(int(tid)), math.log(p), None])
    if extensions and cfg.repetition_fix and table is not None:
        top_surface = extensions[0][1]
        if cfg.repetition_trigger == "output":
            triggered = detect_repetition(hyp, top_surface)
        else:
            triggered = (hyp.prev_att_argmax is not None
                         and att_argmax == hyp.prev_att_argmax
                         and hyp.prev_token is not None
                         and hyp.prev_token not in SPECIAL_TOKENS)
        if triggered:
            sub = phrase_substitute(hyp, src_tokens, table)
            if sub is not None:
                original_id = extensions[0][0]
                extensions[0] = [model.tgt_vocab.id(sub), sub, extensions[0][2],
                                 original_id]
    out = []
    for tid, surface, logp, substituted_from in extensions:
        new = Hypothesis(
            token_ids=hyp.token_ids + [tid],
            surfaces=hyp.surfaces + [surface],
            logps=hyp.logps + [logp],
            score=hyp.score + logp,
            state=new_state,
            prev_att_argmax=att_argmax,
            finished=(tid == EOS_ID),
            substitutions=hyp.substitutions
            + ([(len(hyp.token_ids), substituted_from)] if substituted_from is not None else []),
        )
        out.append(new)
    return out


def _rank_key(hyp: Hypothesis):
    return (-hyp.score, tuple(hyp.token_ids))


def beam_search(model: NoovModel, src_tokens, lexicon_provider: LexiconProvider | None,
                table: PhraseTable | None, cfg: DecodeConfig) -> DecodeResult:
    """Length-wise beam over the mixed output distribution.

    Hypotheses finish on EOS or the step limit; the final ranking divides
    the accumulated log-probability by the number of scored tokens.
    """
    src_tokens = list(src_tokens)
    if not src_tokens:
        raise DecodeError("cannot decode an empty source sentence")
    provider = lexicon_provider or LexiconProvider.empty()
    lexicon = provider.for_sentence(src_tokens) if cfg.alpha > 0.0 else Lexicon({})
    src_ids = encode_sentence(src_tokens, model.src_vocab)
    enc = model.encode(src_ids)
    start = Hypothesis(state=model.initial_state(enc))
    live = [start]
    finished: list[Hypothesis] = []
    limit = cfg.step_limit(len(src_tokens))
    for _ in range(limit):
        if not live:
            break
        candidates: list[Hypothesis] = []
        for hyp in live:
            candidates.extend(
                _expand(model, hyp, enc, src_tokens, lexicon, table, cfg,
                        cfg.beam_size)
            )
        candidates.sort(key=_rank_key)
        selected = candidates[: cfg.beam_size]
        live = []
        for hyp in selected:
            if hyp.finished:
                finished.append(hyp)
            else:
                live.append(hyp)
    finished.extend(live)  # step-limit terminations
    if not finished:
        raise DecodeError("beam search produced no hypotheses")
    finished.sort(key=lambda h: (-h.normalized_score(), tuple(h.token_ids)))
    return DecodeResult(best=finished[0], nbest=finished)


def greedy_decode(model: NoovModel, src_tokens, lexicon_provider: LexiconProvider | None,
                  table: PhraseTable | None, cfg: DecodeConfig) -> DecodeResult:
    """Plain argmax decoding with the same mixing and repetition rules."""
    src_tokens = list(src_tokens)
    if not src_tokens:
        raise DecodeError("cannot decode an empty source sentence")
    provider = lexicon_provider or LexiconProvider.empty()
    lexicon = provider.for_sentence(src_tokens) if cfg.alpha > 0.0 else Lexicon({})
    src_ids = encode_sentence(src_tokens, model.src_vocab)
    enc = model.encode(src_ids)
    hyp = Hypothesis(state=model.initial_state(enc))
    for _ in range(cfg.step_limit(len(src_tokens))):
        if hyp.finished:
            break
        extensions = _expand(model, hyp, enc, src_tokens, lexicon, table, cfg, 1)
        if not extensions:
            break
        hyp = extensions[0]
    return DecodeResult(best=hyp, nbest=[hyp])


def translate_corpus(model: NoovModel, sentences, cfg: DecodeConfig, out_path,
                     lexicon_provider: LexiconProvider | None = None,
                     table: PhraseTable | None = None,
                     scores_path=None, threads: int | None = None,
                     greedy: bool = False) -> list[DecodeResult | None]:
    """Translate token sequences to a file, one line per input, in order.

    Empty input lines pass through as empty output lines. The optional
    sidecar TSV records `line<TAB>normalized score<TAB>output length`.
    Worker count comes from `threads` or the NOOV_THREADS environment
    variable; results are order-preserving either way.
    """
    sentences = [list(s) for s in sentences]
    if threads is None:
        threads = int(os.environ.get("NOOV_THREADS", "1") or "1")
    threads = max(1, threads)
    decode_fn = greedy_decode if greedy else beam_search

    def translate_one(tokens):
        if not tokens:
            return None
        return decode_fn(model, tokens, lexicon_provider, table, cfg)

    if threads == 1:
        results = [translate_one(s) for s in sentences]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(translate_one, sentences))
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        for res in results:
            f.write(" ".join(res.best.output_tokens()) if res else "")
            f.write("\n")
    if scores_path is not None:
        with open(scores_path, "w", encoding="utf-8", newline="\n") as f:
            for lineno, res in enumerate(results, start=1):
                if res is None:
                    f.write("%d\t0\t0\n" % lineno)
                else:
                    f.write("%d\t%.6f\t%d\n" % (
                        lineno, res.best.normalized_score(),
                        len(res.best.output_tokens()),
                    ))
    return results
