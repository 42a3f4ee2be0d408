import hashlib
import json

import numpy as np
import pytest

from noov.align import EmConfig, ibm1_em, load_lexicon
from noov.cli import build_parser, main
from noov.corpus import ParallelCorpus, load_parallel, save_parallel
from conftest import substitution_corpus, write_lines


def run_cli(*argv):
    return main(list(argv))


@pytest.fixture
def corpus_files(tmp_path):
    corpus = substitution_corpus(100, seed=1, n_words=10, min_len=2, max_len=6)
    src = tmp_path / "all.src"
    tgt = tmp_path / "all.tgt"
    save_parallel(corpus, src, tgt)
    return src, tgt


def train_tiny(tmp_path, corpus_files, out_name="m", extra=()):
    src, tgt = corpus_files
    out = tmp_path / out_name
    rc = run_cli(
        "train", "--train-src", str(src), "--train-tgt", str(tgt),
        "--out-dir", str(out), "--hidden-size", "8", "--batch-size", "16",
        "--dropout", "0", "--max-epochs", "2", "--patience", "2",
        "--seed", "3", *extra,
    )
    assert rc == 0
    return out / "model.noov"


class TestHelp:
    @pytest.mark.parametrize(
        "command",
        ["prepare", "align", "phrasebook", "train", "finetune", "translate",
         "evaluate", "tune-alpha"],
    )
    def test_help_lists_defaults(self, command, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args([command, "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        assert "default" in out

    def test_all_commands_registered(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["--help"])
        out = capsys.readouterr().out
        for command in ("prepare", "align", "phrasebook", "train", "finetune",
                        "translate", "evaluate", "tune-alpha"):
            assert command in out


class TestPrepare:
    def test_writes_splits_and_vocabs(self, tmp_path, corpus_files):
        src, tgt = corpus_files
        out = tmp_path / "prep"
        rc = run_cli("prepare", str(src), str(tgt), "--out-dir", str(out),
                     "--test-frac", "0.2", "--dev-frac", "0.1", "--seed", "5")
        assert rc == 0
        for name in ("train.src", "train.tgt", "dev.src", "dev.tgt", "test.src",
                     "test.tgt", "vocab.src.tsv", "vocab.tgt.tsv",
                     "prepare.config.json"):
            assert (out / name).exists()
        train = load_parallel(out / "train.src", out / "train.tgt")
        dev = load_parallel(out / "dev.src", out / "dev.tgt")
        test = load_parallel(out / "test.src", out / "test.tgt")
        assert (len(train), len(dev), len(test)) == (72, 8, 20)

    def test_rerun_identical(self, tmp_path, corpus_files):
        src, tgt = corpus_files
        digests = []
        for run in range(2):
            out = tmp_path / ("prep%d" % run)
            assert run_cli("prepare", str(src), str(tgt), "--out-dir", str(out),
                           "--seed", "5") == 0
            digest = {
                p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                for p in sorted(out.iterdir())
            }
            digests.append(digest)
        assert digests[0] == digests[1]

    def test_missing_file_fails(self, tmp_path, capsys):
        rc = run_cli("prepare", str(tmp_path / "nope.src"),
                     str(tmp_path / "nope.tgt"), "--out-dir", str(tmp_path / "o"))
        assert rc != 0
        assert "error" in capsys.readouterr().err


class TestAlign:
    def test_single_pair(self, tmp_path):
        src = write_lines(tmp_path / "s.txt", ["la"])
        tgt = write_lines(tmp_path / "t.txt", ["the"])
        out = tmp_path / "lex.tsv"
        assert run_cli("align", "--src", str(src), "--tgt", str(tgt),
                       "--out", str(out), "--iters", "2") == 0
        lex = load_lexicon(out)
        assert lex.get("la") == (("the", 1.0),)

    def test_matches_library_em(self, tmp_path, toy_corpus):
        src = tmp_path / "s.txt"
        tgt = tmp_path / "t.txt"
        save_parallel(toy_corpus, src, tgt)
        out = tmp_path / "lex.tsv"
        assert run_cli("align", "--src", str(src), "--tgt", str(tgt),
                       "--out", str(out), "--iters", "50") == 0
        direct = ibm1_em(toy_corpus, EmConfig(iterations=50))
        assert load_lexicon(out).approx_equal(direct, tol=1e-9)

    def test_missing_file(self, tmp_path, capsys):
        rc = run_cli("align", "--src", str(tmp_path / "missing.src"),
                     "--tgt", str(tmp_path / "missing.tgt"),
                     "--out", str(tmp_path / "lex.tsv"))
        assert rc != 0
        assert capsys.readouterr().err


class TestPhrasebook:
    def test_validate(self, tmp_path, capsys):
        table = write_lines(tmp_path / "t.tsv",
                            ["flu shot\tvacuna contra la influenza", "a\tb"])
        assert run_cli("phrasebook", "validate", "--table", str(table)) == 0
        out = capsys.readouterr().out
        assert "entries\t2" in out

    def test_inspect(self, tmp_path, capsys):
        table = write_lines(tmp_path / "t.tsv",
                            ["flu shot\tvacuna contra la influenza"])
        assert run_cli("phrasebook", "inspect", "--table", str(table),
                       "--sentence", "flu shot was provided",
                       "--trigger", "vacuna") == 0
        out = capsys.readouterr().out
        assert "continuation\tcontra" in out


class TestTrainCli:
    def test_patience_zero_single_epoch(self, tmp_path, corpus_files):
        src, tgt = corpus_files
        out = tmp_path / "t0"
        rc = run_cli("train", "--train-src", str(src), "--train-tgt", str(tgt),
                     "--out-dir", str(out), "--hidden-size", "8",
                     "--batch-size", "16", "--dropout", "0",
                     "--max-epochs", "50", "--patience", "0")
        assert rc == 0
        rows = (out / "train.log.tsv").read_text(encoding="utf-8").splitlines()
        assert rows[0] == "epoch\ttrain_loss\tdev_loss"
        assert len(rows) == 3  # epoch 0 + exactly one training epoch

    def test_joint_training_concatenates(self, tmp_path, corpus_files):
        src, tgt = corpus_files
        ckpt = train_tiny(tmp_path, corpus_files, "joint",
                          extra=("--train-src", str(src), "--train-tgt", str(tgt)))
        assert ckpt.exists()

    def test_config_file_and_unknown_key(self, tmp_path, corpus_files, capsys):
        src, tgt = corpus_files
        good = tmp_path / "good.json"
        good.write_text(json.dumps({"model": {"hidden_size": 8, "max_epochs": 1,
                                              "dropout": 0.0}}), encoding="utf-8")
        assert run_cli("train", "--train-src", str(src), "--train-tgt", str(tgt),
                       "--out-dir", str(tmp_path / "cfg"), "--config", str(good),
                       "--batch-size", "16") == 0
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"model": {"hiden_size": 8}}), encoding="utf-8")
        rc = run_cli("train", "--train-src", str(src), "--train-tgt", str(tgt),
                     "--out-dir", str(tmp_path / "cfg2"), "--config", str(bad))
        assert rc != 0
        assert "hiden_size" in capsys.readouterr().err


class TestFinetuneCli:
    def test_resumes_and_writes_new_checkpoint(self, tmp_path, corpus_files):
        base = train_tiny(tmp_path, corpus_files, "base")
        before = hashlib.sha256(base.read_bytes()).hexdigest()
        out = tmp_path / "ft"
        rc = run_cli("finetune", "--init-checkpoint", str(base),
                     "--train-src", str(corpus_files[0]),
                     "--train-tgt", str(corpus_files[1]),
                     "--out-dir", str(out), "--max-epochs", "1")
        assert rc == 0
        assert (out / "model.noov").exists()
        assert hashlib.sha256(base.read_bytes()).hexdigest() == before


class TestTranslateCli:
    def test_flags_disable_machinery(self, tmp_path, corpus_files):
        ckpt = train_tiny(tmp_path, corpus_files, "m1")
        src, tgt = corpus_files
        lex = tmp_path / "lex.tsv"
        assert run_cli("align", "--src", str(src), "--tgt", str(tgt),
                       "--out", str(lex), "--iters", "3") == 0
        table = write_lines(tmp_path / "pt.tsv", ["s1 s2\tt1 t2"])
        inp = write_lines(tmp_path / "in.txt", ["s1 s2 s3", "s4 s5"])
        vanilla = tmp_path / "vanilla.txt"
        disabled = tmp_path / "disabled.txt"
        assert run_cli("translate", "--checkpoint", str(ckpt), "--input", str(inp),
                       "--output", str(vanilla), "--beam", "4") == 0
        assert run_cli("translate", "--checkpoint", str(ckpt), "--input", str(inp),
                       "--output", str(disabled), "--beam", "4",
                       "--lexicon", str(lex), "--phrase-table", str(table),
                       "--alpha", "0", "--no-repetition-fix") == 0
        assert vanilla.read_bytes() == disabled.read_bytes()

    def test_beam_one_equals_greedy(self, tmp_path, corpus_files):
        ckpt = train_tiny(tmp_path, corpus_files, "m2")
        inp = write_lines(tmp_path / "in.txt", ["s1 s2 s3", "s4 s5 s0"])
        beam1 = tmp_path / "b1.txt"
        greedy = tmp_path / "g.txt"
        assert run_cli("translate", "--checkpoint", str(ckpt), "--input", str(inp),
                       "--output", str(beam1), "--beam", "1", "--alpha", "0") == 0
        assert run_cli("translate", "--checkpoint", str(ckpt), "--input", str(inp),
                       "--output", str(greedy), "--greedy", "--alpha", "0") == 0
        assert beam1.read_bytes() == greedy.read_bytes()

    def test_deterministic_rerun_with_context_lexicon(self, tmp_path, corpus_files):
        ckpt = train_tiny(tmp_path, corpus_files, "m3")
        src, tgt = corpus_files
        inp = write_lines(tmp_path / "in.txt", ["s1 s2", "s3 s4 s5"])
        outs = []
        for run in range(2):
            out = tmp_path / ("out%d.txt" % run)
            assert run_cli("translate", "--checkpoint", str(ckpt), "--input",
                           str(inp), "--output", str(out), "--beam", "2",
                           "--context-src", str(src), "--context-tgt", str(tgt),
                           "--lexicon-mode", "context_backoff_global",
                           "--scores", str(tmp_path / ("sc%d.tsv" % run))) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_explicit_context_mode_without_corpus_fails(self, tmp_path,
                                                        corpus_files, capsys):
        ckpt = train_tiny(tmp_path, corpus_files, "m4")
        inp = write_lines(tmp_path / "in.txt", ["s1"])
        rc = run_cli("translate", "--checkpoint", str(ckpt), "--input", str(inp),
                     "--output", str(tmp_path / "o.txt"),
                     "--lexicon-mode", "context")
        assert rc != 0
        assert "context" in capsys.readouterr().err


class TestEvaluateCli:
    def test_identity_scores_100(self, tmp_path, capsys):
        hyp = write_lines(tmp_path / "h.txt", ["a b c d", "e f g h"])
        ref = write_lines(tmp_path / "r.txt", ["a b c d", "e f g h"])
        src = write_lines(tmp_path / "s.txt", ["q w e r", "t y u i"])
        out = tmp_path / "rep"
        rc = run_cli("evaluate", "--hyp", str(hyp), "--ref", str(ref),
                     "--src", str(src), "--out-dir", str(out),
                     "--buckets", "10,20,30")
        assert rc == 0
        assert "BLEU = 100.00" in capsys.readouterr().out
        assert (out / "bleu.txt").exists()
        assert (out / "bleu.tsv").exists()
        assert (out / "buckets.tsv").exists()
        assert (out / "buckets.svg").exists()
        config = json.loads((out / "evaluate.config.json").read_text())
        assert config["evaluate"]["buckets"] == [10, 20, 30]

    def test_mismatched_lines_fail(self, tmp_path, capsys):
        hyp = write_lines(tmp_path / "h.txt", ["a"])
        ref = write_lines(tmp_path / "r.txt", ["a", "b"])
        rc = run_cli("evaluate", "--hyp", str(hyp), "--ref", str(ref),
                     "--out-dir", str(tmp_path / "rep"))
        assert rc != 0
        assert capsys.readouterr().err


class TestTuneAlphaCli:
    def test_sweep_produces_six_rows(self, tmp_path, corpus_files, capsys):
        ckpt = train_tiny(tmp_path, corpus_files, "m5")
        src, tgt = corpus_files
        lex = tmp_path / "lex.tsv"
        assert run_cli("align", "--src", str(src), "--tgt", str(tgt),
                       "--out", str(lex), "--iters", "3") == 0
        dev_src = write_lines(tmp_path / "d.src", ["s1 s2", "s3 s4"])
        dev_tgt = write_lines(tmp_path / "d.tgt", ["t1 t2", "t3 t4"])
        out = tmp_path / "sweep"
        rc = run_cli("tune-alpha", "--checkpoint", str(ckpt),
                     "--dev-src", str(dev_src), "--dev-tgt", str(dev_tgt),
                     "--lexicon", str(lex), "--lexicon-mode", "global",
                     "--beam", "2", "--out-dir", str(out))
        assert rc == 0
        rows = capsys.readouterr().out.strip().splitlines()
        assert rows[0] == "alpha\tBLEU"
        assert len(rows) == 7
        assert [r.split("\t")[0] for r in rows[1:]] == ["0.0", "0.2", "0.4",
                                                        "0.6", "0.8", "1.0"]
        assert (out / "tune_alpha.tsv").exists()
