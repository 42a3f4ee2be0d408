import math

import numpy as np
import pytest

from noov.evaluation import (
    EvalError,
    BleuReport,
    bleu_corpus,
    bleu_report_text,
    bleu_report_tsv,
    bucket_report_tsv,
    experiment_summary,
    experiment_summary_tsv,
    length_bucket_report,
    write_bucket_figure,
)
import oracles


class TestBleuCorpus:
    def test_identity_is_one(self):
        hyps = ["the cat sat on the mat", "he denies any pain today"]
        assert bleu_corpus(hyps, list(hyps)).bleu == pytest.approx(1.0)

    def test_disjoint_is_zero(self):
        rep = bleu_corpus(["aa bb cc dd"], ["xx yy zz ww"])
        assert rep.bleu == 0.0
        assert rep.precisions[0] == 0.0

    def test_clipped_unigram_example(self):
        hyp = "the the the the the the the"
        ref = "the cat is on the mat"
        rep = bleu_corpus([hyp], [ref])
        match, total = oracles.clipped_ngram_counts(hyp.split(), ref.split(), 1)
        assert (match, total) == (2, 7)
        assert rep.precisions[0] == pytest.approx(2 / 7)
        assert rep.match_counts[0] == 2 and rep.total_counts[0] == 7

    def test_matches_oracle_counts_all_orders(self):
        hyps = ["a b c d e f", "g g h h", "a a a b"]
        refs = ["a b c x e f", "g h h h", "b a a a"]
        rep = bleu_corpus(hyps, refs)
        for n in range(1, 5):
            match = total = 0
            for h, r in zip(hyps, refs):
                m, t = oracles.clipped_ngram_counts(h.split(), r.split(), n)
                match += m
                total += t
            assert rep.match_counts[n - 1] == match
            assert rep.total_counts[n - 1] == total

    def test_bleu_recomposes_from_parts(self):
        hyps = ["a b c d e", "f g h i j k"]
        refs = ["a b c d x", "f g h i j q"]
        rep = bleu_corpus(hyps, refs)
        log_mean = sum(math.log(p) for p in rep.precisions) / 4
        assert rep.bleu == pytest.approx(rep.brevity_penalty * math.exp(log_mean),
                                         abs=1e-9)

    def test_brevity_penalty(self):
        # shorter hypothesis -> BP < 1; equal/longer -> BP == 1
        short = bleu_corpus(["a b c"], ["a b c d e"])
        assert short.brevity_penalty == pytest.approx(math.exp(1 - 5 / 3))
        equal = bleu_corpus(["a b c d e"], ["a b c d e"])
        assert equal.brevity_penalty == 1.0
        longer = bleu_corpus(["a b c d e f"], ["a b c"])
        assert longer.brevity_penalty == 1.0

    def test_smoothing_add_one_for_zero(self):
        rep = bleu_corpus(["a b"], ["a x"], smoothing="add_one_for_zero")
        # bigram match is zero: replaced by 1/(2*total)=1/2
        assert rep.precisions[1] == pytest.approx(0.5)
        assert rep.bleu > 0.0

    def test_permutation_invariant(self):
        hyps = ["a b c", "d e f", "g h"]
        refs = ["a b x", "d y f", "g h"]
        rep1 = bleu_corpus(hyps, refs)
        rep2 = bleu_corpus(hyps[::-1], refs[::-1])
        assert rep1.bleu == pytest.approx(rep2.bleu, abs=1e-12)

    def test_token_renaming_invariant(self):
        hyps = ["a b c a", "c c d"]
        refs = ["a b c d", "c d d"]
        rename = {"a": "q", "b": "r", "c": "s", "d": "t"}
        hyps2 = [" ".join(rename[t] for t in h.split()) for h in hyps]
        refs2 = [" ".join(rename[t] for t in r.split()) for r in refs]
        assert bleu_corpus(hyps, refs).bleu == pytest.approx(
            bleu_corpus(hyps2, refs2).bleu, abs=1e-12
        )

    def test_precisions_in_unit_interval(self):
        rep = bleu_corpus(["a b c d e"], ["a b c x y"])
        assert all(0.0 <= p <= 1.0 for p in rep.precisions)

    def test_errors(self):
        with pytest.raises(EvalError):
            bleu_corpus(["a"], ["a", "b"])
        with pytest.raises(EvalError):
            bleu_corpus([], [])
        with pytest.raises(EvalError):
            bleu_corpus(["a"], ["a"], smoothing="bogus")

    def test_token_list_inputs(self):
        assert bleu_corpus([["a", "b"]], [["a", "b"]]).bleu == pytest.approx(1.0)


class TestLengthBuckets:
    def test_single_bucket_equals_corpus(self):
        hyps = ["a b c", "d e f g"]
        refs = ["a b x", "d e f y"]
        bucket = length_bucket_report(hyps, refs, [3, 4], boundaries=[1000])
        corpus = bleu_corpus(hyps, refs)
        assert bucket.bleus[0] == pytest.approx(corpus.bleu)
        assert bucket.counts == [2, 0]

    def test_empty_bucket_omitted(self):
        hyps = ["a b", "c d"]
        refs = ["a b", "c d"]
        rep = length_bucket_report(hyps, refs, [2, 2], boundaries=[10, 20, 30])
        assert rep.counts == [2, 0, 0, 0]
        assert rep.bleus[1] is None and rep.bleus[3] is None
        assert rep.labels == ["1-10", "11-20", "21-30", "31+"]

    def test_pooled_counts_equal_corpus_counts(self):
        rng = np.random.default_rng(0)
        vocab = ["w%d" % i for i in range(30)]
        hyps, refs, lengths = [], [], []
        for _ in range(40):
            n = int(rng.integers(1, 40))
            lengths.append(n)
            hyps.append([vocab[int(i)] for i in rng.integers(0, 30, n)])
            refs.append([vocab[int(i)] for i in rng.integers(0, 30, n)])
        corpus = bleu_corpus(hyps, refs)
        buckets = length_bucket_report(hyps, refs, lengths)
        for n in range(4):
            pooled_match = sum(r.match_counts[n] for r in buckets.reports if r)
            pooled_total = sum(r.total_counts[n] for r in buckets.reports if r)
            assert pooled_match == corpus.match_counts[n]
            assert pooled_total == corpus.total_counts[n]
        assert sum(r.hyp_length for r in buckets.reports if r) == corpus.hyp_length
        assert sum(r.ref_length for r in buckets.reports if r) == corpus.ref_length
        assert sum(buckets.counts) == 40

    def test_boundaries_must_increase(self):
        with pytest.raises(EvalError):
            length_bucket_report(["a"], ["a"], [1], boundaries=[10, 10])
        with pytest.raises(EvalError):
            length_bucket_report(["a"], ["a"], [1], boundaries=[])

    def test_misaligned_inputs(self):
        with pytest.raises(EvalError):
            length_bucket_report(["a"], ["a"], [1, 2])


class TestSummary:
    def test_published_cell_formatting(self):
        report = bleu_corpus(["a"], ["a"])
        report.bleu = 0.3518
        text = experiment_summary([("NOOV/M", report)])
        assert "NOOV/M" in text
        assert "35.18" in text
        tsv = experiment_summary_tsv([("NOOV/M", report)])
        assert "NOOV/M\t35.18" in tsv

    def test_empty_runs_header_only(self):
        assert experiment_summary([]).strip() == "run                          BLEU"
        assert experiment_summary_tsv([]) == "run\tBLEU\n"

    def test_order_preserved(self):
        rep = bleu_corpus(["a"], ["a"])
        text = experiment_summary_tsv([("B", rep), ("A", rep)])
        assert text.index("B\t") < text.index("A\t")


class TestReportFiles:
    def test_text_and_tsv_render(self):
        rep = bleu_corpus(["a b c d e"], ["a b c d e"])
        assert "BLEU = 100.00" in bleu_report_text(rep)
        tsv = bleu_report_tsv(rep)
        assert tsv.splitlines()[0].startswith("bleu\tbp")

    def test_bucket_tsv(self):
        rep = length_bucket_report(["a b"], ["a b"], [2])
        body = bucket_report_tsv(rep)
        assert body.splitlines()[0] == "bucket\tcount\tbleu"
        assert "1-10\t1\t100.00" in body

    def test_figure_is_deterministic_svg(self, tmp_path):
        rep = length_bucket_report(["a b", "c d"], ["a b", "c x"], [2, 15])
        p1 = tmp_path / "fig1.svg"
        p2 = tmp_path / "fig2.svg"
        write_bucket_figure(rep, p1)
        write_bucket_figure(rep, p2)
        data = p1.read_bytes()
        assert data[:100].lstrip().startswith(b"<?xml")
        assert data == p2.read_bytes()
