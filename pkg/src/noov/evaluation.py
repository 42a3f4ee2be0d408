"""BLEU scoring, length-bucketed reports, and experiment summaries.

Corpus BLEU is the standard case-sensitive, token-based, single-reference
BLEU-4: geometric mean of clipped modified n-gram precisions times a
brevity penalty. Reports carry the raw match/total counts so bucketed
scores can be pooled back into the corpus score exactly.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SMOOTHING_MODES = ("none", "add_one_for_zero")
DEFAULT_BOUNDARIES = (10, 20, 30)


class EvalError(ValueError):
    pass


@dataclass
class BleuReport:
    bleu: float
    precisions: list[float]
    brevity_penalty: float
    hyp_length: int
    ref_length: int
    match_counts: list[int]
    total_counts: list[int]
    smoothing: str = "none"


def _as_tokens(sent) -> list[str]:
    return sent.split() if isinstance(sent, str) else list(sent)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _bleu_from_counts(match: list[int], total: list[int], hyp_len: int,
                      ref_len: int, smoothing: str) -> tuple[float, list[float], float]:
    precisions = []
    used = []
    for m, t in zip(match, total):
        if t == 0:
            precisions.append(0.0)
            continue
        if m == 0 and smoothing == "add_one_for_zero":
            p = 1.0 / (2.0 * t)
        else:
            p = m / t
        precisions.append(p)
        used.append(p)
    if hyp_len == 0:
        return 0.0, precisions, 0.0
    bp = 1.0 if hyp_len >= ref_len else math.exp(1.0 - ref_len / hyp_len)
    if not used or any(p == 0.0 for p in used):
        return 0.0, precisions, bp
    log_mean = sum(math.log(p) for p in used) / len(used)
    return bp * math.exp(log_mean), precisions, bp


def bleu_corpus(hyps: Sequence, refs: Sequence, max_n: int = 4,
                smoothing: str = "none") -> BleuReport:
    """Corpus-level BLEU with clipped n-gram counts summed over sentences.

    add_one_for_zero smoothing replaces a zero precision with
    1/(2 * denominator); n-gram orders with no candidates at all are
    excluded from the geometric mean.
    """
    if smoothing not in SMOOTHING_MODES:
        raise EvalError("smoothing must be one of %s" % (SMOOTHING_MODES,))
    hyps = list(hyps)
    refs = list(refs)
    if len(hyps) != len(refs):
        raise EvalError(
            "hypothesis/reference counts differ: %d vs %d" % (len(hyps), len(refs))
        )
    if not hyps:
        raise EvalError("cannot score an empty corpus")
    match = [0] * max_n
    total = [0] * max_n
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyps, refs):
        h = _as_tokens(hyp)
        r = _as_tokens(ref)
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            hn = _ngrams(h, n)
            rn = _ngrams(r, n)
            total[n - 1] += sum(hn.values())
            match[n - 1] += sum(min(c, rn.get(g, 0)) for g, c in hn.items())
    bleu, precisions, bp = _bleu_from_counts(match, total, hyp_len, ref_len, smoothing)
    return BleuReport(
        bleu=bleu, precisions=precisions, brevity_penalty=bp,
        hyp_length=hyp_len, ref_length=ref_len,
        match_counts=match, total_counts=total, smoothing=smoothing,
    )


@dataclass
class LengthBucketReport:
    boundaries: list[int]
    labels: list[str]
    counts: list[int]
    bleus: list[float | None]
    reports: list[BleuReport | None]


def _bucket_labels(boundaries: Sequence[int]) -> list[str]:
    labels = []
    low = 1
    for b in boundaries:
        labels.append("%d-%d" % (low, b))
        low = b + 1
    labels.append("%d+" % low)
    return labels


def length_bucket_report(hyps: Sequence, refs: Sequence, src_lengths: Sequence[int],
                         boundaries: Sequence[int] = DEFAULT_BOUNDARIES,
                         smoothing: str = "none") -> LengthBucketReport:
    """Corpus BLEU computed independently inside source-length buckets.

    boundaries are inclusive upper bounds; a final open bucket catches
    the rest. Empty buckets report count 0 with BLEU omitted.
    """
    boundaries = list(boundaries)
    if any(b2 <= b1 for b1, b2 in zip(boundaries, boundaries[1:])) or not boundaries:
        raise EvalError("bucket boundaries must be strictly increasing and non-empty")
    hyps = list(hyps)
    refs = list(refs)
    src_lengths = list(src_lengths)
    if not len(hyps) == len(refs) == len(src_lengths):
        raise EvalError("hyps, refs, and src_lengths must align")
    n_buckets = len(boundaries) + 1
    grouped: list[list[int]] = [[] for _ in range(n_buckets)]
    for i, length in enumerate(src_lengths):
        for b, bound in enumerate(boundaries):
            if length <= bound:
                grouped[b].append(i)
                break
        else:
            grouped[-1].append(i)
    counts = [len(g) for g in grouped]
    reports: list[BleuReport | None] = []
    bleus: list[float | None] = []
    for g in grouped:
        if not g:
            reports.append(None)
            bleus.append(None)
            continue
        rep = bleu_corpus([hyps[i] for i in g], [refs[i] for i in g],
                          smoothing=smoothing)
        reports.append(rep)
        bleus.append(rep.bleu)
    return LengthBucketReport(
        boundaries=boundaries, labels=_bucket_labels(boundaries),
        counts=counts, bleus=bleus, reports=reports,
    )


def experiment_summary(runs: Sequence[tuple[str, BleuReport]]) -> str:
    """Plain-text table of labels against BLEU*100 (2 decimals)."""
    lines = ["%-24s %8s" % ("run", "BLEU")]
    for label, report in runs:
        lines.append("%-24s %8.2f" % (label, report.bleu * 100.0))
    return "\n".join(lines) + "\n"


def experiment_summary_tsv(runs: Sequence[tuple[str, BleuReport]]) -> str:
    lines = ["run\tBLEU"]
    for label, report in runs:
        lines.append("%s\t%.2f" % (label, report.bleu * 100.0))
    return "\n".join(lines) + "\n"


def bleu_report_text(report: BleuReport) -> str:
    precs = " ".join("p%d=%.4f" % (i + 1, p) for i, p in enumerate(report.precisions))
    return (
        "BLEU = %.2f  (%s)  BP=%.4f  hyp_len=%d  ref_len=%d  smoothing=%s\n"
        % (report.bleu * 100.0, precs, report.brevity_penalty,
           report.hyp_length, report.ref_length, report.smoothing)
    )


def bleu_report_tsv(report: BleuReport) -> str:
    header = ["bleu", "bp", "hyp_len", "ref_len"]
    row = ["%.6f" % report.bleu, "%.6f" % report.brevity_penalty,
           str(report.hyp_length), str(report.ref_length)]
    for i, p in enumerate(report.precisions):
        header.append("p%d" % (i + 1))
        row.append("%.6f" % p)
    return "\t".join(header) + "\n" + "\t".join(row) + "\n"


def bucket_report_tsv(report: LengthBucketReport) -> str:
    lines = ["bucket\tcount\tbleu"]
    for label, count, bleu in zip(report.labels, report.counts, report.bleus):
        cell = "%.2f" % (bleu * 100.0) if bleu is not None else ""
        lines.append("%s\t%d\t%s" % (label, count, cell))
    return "\n".join(lines) + "\n"


def write_bucket_figure(report: LengthBucketReport, path) -> None:
    """Render BLEU against source-length bucket to an SVG file.

    Output is byte-deterministic: fixed hash salt, no date metadata.
    """
    with plt.rc_context({"svg.hashsalt": "noov"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        xs = range(len(report.labels))
        ys = [(b * 100.0) if b is not None else 0.0 for b in report.bleus]
        ax.bar(xs, ys, color="#4878a8")
        ax.set_xticks(list(xs))
        ax.set_xticklabels(report.labels)
        ax.set_xlabel("source sentence length")
        ax.set_ylabel("BLEU")
        for x, y, count in zip(xs, ys, report.counts):
            ax.annotate("n=%d" % count, (x, y), ha="center", va="bottom", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
