"""Command-line interface wiring the pipeline together.

Commands: prepare, align, phrasebook, train, finetune, translate,
evaluate, tune-alpha. Diagnostics go to stderr; data goes to stdout and
files. Every command echoes its effective configuration into the output
directory and is deterministic given config and seed. NOOV_THREADS caps
translation worker threads.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import decode as decode_mod
from . import evaluation as eval_mod
from .align import EmConfig, ibm1_em, load_lexicon, prune_lexicon, save_lexicon
from .config import (
    DEFAULTS,
    ConfigError,
    load_config_file,
    load_run_config,
    resolve,
    write_effective_config,
)
from .corpus import (
    ParallelCorpus,
    SplitSpec,
    Vocabulary,
    load_parallel,
    oov_rate,
    save_parallel,
    split_corpus,
    tokenize,
)
from .decode import DecodeConfig, LexiconProvider, beam_search, translate_corpus
from .model import (
    ModelConfig,
    NoovModel,
    fine_tune,
    load_checkpoint,
    model_from_checkpoint,
    save_checkpoint,
)
from .phrasebook import PhraseTable, continuation, find_match

ALPHA_SWEEP = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _read_token_lines(path) -> list[list[str]]:
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    return [tokenize(line) for line in text.split("\n")] if text else []


def _load_concat(src_paths, tgt_paths, name: str) -> ParallelCorpus:
    if len(src_paths) != len(tgt_paths):
        raise ConfigError(
            "need matching --src/--tgt counts (%d vs %d)"
            % (len(src_paths), len(tgt_paths))
        )
    token_pairs = []
    for s, t in zip(src_paths, tgt_paths):
        for pair in load_parallel(s, t):
            token_pairs.append((pair.source, pair.target))
    return ParallelCorpus.from_token_pairs(token_pairs, name)


# ----------------------------------------------------------------------
# prepare
# ----------------------------------------------------------------------


def cmd_prepare(args) -> int:
    cfg = load_run_config(args.config)
    test_frac = resolve(args.test_frac, cfg, "corpus", "test_fraction")
    dev_frac = resolve(args.dev_frac, cfg, "corpus", "dev_fraction_of_rest")
    seed = resolve(args.seed, cfg, "corpus", "seed")
    min_count = resolve(args.min_count, cfg, "corpus", "min_count")

    corpus = load_parallel(args.src, args.tgt, name=args.name or "corpus")
    train, dev, test = split_corpus(
        corpus, SplitSpec(test_fraction=test_frac, dev_fraction_of_rest=dev_frac, seed=seed)
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for split, label in ((train, "train"), (dev, "dev"), (test, "test")):
        save_parallel(split, out / ("%s.src" % label), out / ("%s.tgt" % label))
    src_vocab = Vocabulary.build(train.source_sentences(), min_count)
    tgt_vocab = Vocabulary.build(train.target_sentences(), min_count)
    src_vocab.save(out / "vocab.src.tsv")
    tgt_vocab.save(out / "vocab.tgt.tsv")

    effective = {
        "corpus": {"test_fraction": test_frac, "dev_fraction_of_rest": dev_frac,
                   "seed": seed, "min_count": min_count},
        "inputs": {"src": str(args.src), "tgt": str(args.tgt)},
    }
    write_effective_config(effective, out, "prepare")
    test_oov = oov_rate(test.source_sentences(), src_vocab)
    _info("prepare: %d pairs -> train=%d dev=%d test=%d (test source OOV %.3f)"
          % (len(corpus), len(train), len(dev), len(test), test_oov))
    return 0


# ----------------------------------------------------------------------
# align
# ----------------------------------------------------------------------


def cmd_align(args) -> int:
    corpus = _load_concat(args.src, args.tgt, "align")
    em_cfg = EmConfig(
        iterations=args.iters,
        additive_smoothing=args.smoothing,
        null_word=not args.no_null,
    )
    lexicon = ibm1_em(corpus, em_cfg)
    if args.top_k is not None:
        lexicon = prune_lexicon(lexicon, args.top_k, args.min_prob)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_lexicon(lexicon, out)
    effective = {
        "align": {"iters": args.iters, "smoothing": args.smoothing,
                  "null_word": not args.no_null, "top_k": args.top_k,
                  "min_prob": args.min_prob},
        "inputs": {"src": [str(p) for p in args.src], "tgt": [str(p) for p in args.tgt]},
    }
    write_effective_config(effective, out.parent, "align")
    _info("align: %d pairs -> %d source entries (%s)" % (len(corpus), len(lexicon), out))
    return 0


# ----------------------------------------------------------------------
# phrasebook
# ----------------------------------------------------------------------


def cmd_phrasebook(args) -> int:
    table = PhraseTable.load(args.table)
    if args.action == "validate":
        by_len = {}
        for e in table.entries:
            by_len[len(e.source)] = by_len.get(len(e.source), 0) + 1
        print("entries\t%d" % len(table))
        for length in sorted(by_len):
            print("source_len_%d\t%d" % (length, by_len[length]))
        return 0
    # inspect
    if not args.sentence or not args.trigger:
        raise ConfigError("phrasebook inspect needs --sentence and --trigger")
    src_tokens = tokenize(args.sentence)
    match = find_match(src_tokens, args.trigger, table)
    if match is None:
        print("match\tnone")
        return 0
    entry = table.entries[match.entry_id]
    cont = continuation(match, table)
    print("match\t%d" % match.entry_id)
    print("source_phrase\t%s" % " ".join(entry.source))
    print("target_phrase\t%s" % " ".join(entry.target))
    print("source_span\t%d:%d" % match.source_span)
    print("continuation\t%s" % (cont if cont is not None else ""))
    return 0


# ----------------------------------------------------------------------
# train / finetune
# ----------------------------------------------------------------------


def _model_config(args, config_path, base: dict | None = None) -> ModelConfig:
    """Resolve model settings: flag > config file > base > defaults."""
    file_section = {}
    if config_path:
        file_section = load_config_file(config_path).get("model", {})
    base = base or {}
    values = {}
    for key, default in DEFAULTS["model"].items():
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
        elif key in file_section:
            values[key] = file_section[key]
        elif key in base:
            values[key] = base[key]
        else:
            values[key] = default
    return ModelConfig(**values)


def _write_training_outputs(ckpt, out_dir: Path, command: str, model_cfg: ModelConfig):
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / "model.noov"
    save_checkpoint(ckpt, ckpt_path)
    with open(out_dir / "train.log.tsv", "w", encoding="utf-8", newline="\n") as f:
        f.write("epoch\ttrain_loss\tdev_loss\n")
        for epoch, train_loss, dev_loss in ckpt.history:
            f.write("%d\t%.6f\t%.6f\n" % (epoch, train_loss, dev_loss))
    write_effective_config({"model": model_cfg.to_dict()}, out_dir, command)
    _info("%s: best epoch %d (dev loss %.6f) -> %s"
          % (command, ckpt.epoch, ckpt.dev_loss, ckpt_path))


def cmd_train(args) -> int:
    cfg = load_run_config(args.config)
    model_cfg = _model_config(args, args.config)
    min_count = resolve(args.min_count, cfg, "corpus", "min_count")
    train = _load_concat(args.train_src, args.train_tgt, "train")
    dev = None
    if args.dev_src and args.dev_tgt:
        dev = _load_concat([args.dev_src], [args.dev_tgt], "dev")
    if args.src_vocab and args.tgt_vocab:
        src_vocab = Vocabulary.load(args.src_vocab)
        tgt_vocab = Vocabulary.load(args.tgt_vocab)
    else:
        src_vocab = Vocabulary.build(train.source_sentences(), min_count)
        tgt_vocab = Vocabulary.build(train.target_sentences(), min_count)
    model = NoovModel.create(model_cfg, src_vocab, tgt_vocab)
    ckpt = model.train(train, dev)
    _write_training_outputs(ckpt, Path(args.out_dir), "train", model_cfg)
    return 0


def cmd_finetune(args) -> int:
    base_ckpt = load_checkpoint(args.init_checkpoint)
    model_cfg = _model_config(args, args.config, base=base_ckpt.config.to_dict())
    train = _load_concat(args.train_src, args.train_tgt, "finetune")
    dev = None
    if args.dev_src and args.dev_tgt:
        dev = _load_concat([args.dev_src], [args.dev_tgt], "dev")
    ckpt = fine_tune(base_ckpt, train, dev, model_cfg)
    _write_training_outputs(ckpt, Path(args.out_dir), "finetune", model_cfg)
    return 0


# ----------------------------------------------------------------------
# translate
# ----------------------------------------------------------------------


def _decode_config(args, cfg) -> DecodeConfig:
    repetition_fix = resolve(args.repetition_fix, cfg, "decode", "repetition_fix")
    return DecodeConfig(
        beam_size=resolve(args.beam, cfg, "decode", "beam"),
        alpha=resolve(args.alpha, cfg, "decode", "alpha"),
        max_len=args.max_len if args.max_len is not None else cfg["decode"]["max_len"],
        renormalize_lexicon=resolve(args.renormalize, cfg, "decode", "renormalize"),
        lexicon_mode=resolve(args.lexicon_mode, cfg, "decode", "lexicon_mode"),
        repetition_fix=repetition_fix,
        repetition_trigger=resolve(args.repetition_trigger, cfg, "decode",
                                   "repetition_trigger"),
    )


def _build_provider(args, decode_cfg: DecodeConfig) -> tuple[LexiconProvider, str]:
    global_lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    mode = decode_cfg.lexicon_mode
    has_context = bool(args.context_src and args.context_tgt)
    if mode != "global" and not has_context:
        if args.lexicon_mode is not None:
            raise ConfigError(
                "lexicon_mode %r needs --context-src/--context-tgt" % mode
            )
        _info("translate: no context corpus given; falling back to the global lexicon")
        mode = "global"
    if mode == "global":
        return LexiconProvider(mode="global", global_lexicon=global_lexicon), mode
    corpus = _load_concat([args.context_src], [args.context_tgt], "context")
    em_cfg = EmConfig(iterations=args.context_iters)
    provider = LexiconProvider(
        mode=mode, global_lexicon=global_lexicon, corpus=corpus,
        em_config=em_cfg, max_pairs=args.max_pairs,
    )
    return provider, mode


def cmd_translate(args) -> int:
    cfg = load_run_config(args.config)
    decode_cfg = _decode_config(args, cfg)
    ckpt = load_checkpoint(args.checkpoint)
    model = model_from_checkpoint(ckpt)
    provider, mode = _build_provider(args, decode_cfg)
    table = PhraseTable.load(args.phrase_table) if args.phrase_table else None
    sentences = _read_token_lines(args.input)
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    translate_corpus(
        model, sentences, decode_cfg, out_path,
        lexicon_provider=provider, table=table,
        scores_path=args.scores, threads=args.threads, greedy=args.greedy,
    )
    effective = {
        "decode": {
            "beam": decode_cfg.beam_size, "alpha": decode_cfg.alpha,
            "max_len": decode_cfg.max_len, "lexicon_mode": mode,
            "renormalize": decode_cfg.renormalize_lexicon,
            "repetition_fix": decode_cfg.repetition_fix,
            "repetition_trigger": decode_cfg.repetition_trigger,
            "greedy": args.greedy,
        },
        "paths": {"checkpoint": str(args.checkpoint), "lexicon": args.lexicon,
                  "phrase_table": args.phrase_table, "output": str(out_path)},
    }
    write_effective_config(effective, out_path.parent, "translate")
    _info("translate: %d lines -> %s" % (len(sentences), out_path))
    return 0


# ----------------------------------------------------------------------
# evaluate
# ----------------------------------------------------------------------


def _parse_buckets(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError("bad bucket boundaries %r" % text) from exc


def cmd_evaluate(args) -> int:
    hyps = _read_token_lines(args.hyp)
    refs = _read_token_lines(args.ref)
    report = eval_mod.bleu_corpus(hyps, refs, smoothing=args.smoothing)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bleu.txt").write_text(eval_mod.bleu_report_text(report), encoding="utf-8")
    (out / "bleu.tsv").write_text(eval_mod.bleu_report_tsv(report), encoding="utf-8")
    sys.stdout.write(eval_mod.bleu_report_text(report))
    boundaries = _parse_buckets(args.buckets)
    effective = {
        "evaluate": {"buckets": boundaries, "smoothing": args.smoothing},
        "inputs": {"hyp": str(args.hyp), "ref": str(args.ref),
                   "src": str(args.src) if args.src else None},
    }
    if args.src:
        src_lengths = [len(s) for s in _read_token_lines(args.src)]
        bucket_report = eval_mod.length_bucket_report(
            hyps, refs, src_lengths, boundaries, smoothing=args.smoothing
        )
        (out / "buckets.tsv").write_text(
            eval_mod.bucket_report_tsv(bucket_report), encoding="utf-8"
        )
        eval_mod.write_bucket_figure(bucket_report, out / "buckets.svg")
    write_effective_config(effective, out, "evaluate")
    _info("evaluate: wrote reports to %s" % out)
    return 0


# ----------------------------------------------------------------------
# tune-alpha
# ----------------------------------------------------------------------


def cmd_tune_alpha(args) -> int:
    cfg = load_run_config(args.config)
    base_cfg = _decode_config(args, cfg)
    ckpt = load_checkpoint(args.checkpoint)
    model = model_from_checkpoint(ckpt)
    provider, _ = _build_provider(args, base_cfg)
    table = PhraseTable.load(args.phrase_table) if args.phrase_table else None
    sentences = _read_token_lines(args.dev_src)
    refs = _read_token_lines(args.dev_tgt)
    rows = []
    for alpha in ALPHA_SWEEP:
        sweep_cfg = DecodeConfig(
            beam_size=base_cfg.beam_size, alpha=alpha, max_len=base_cfg.max_len,
            renormalize_lexicon=base_cfg.renormalize_lexicon,
            lexicon_mode=base_cfg.lexicon_mode,
            repetition_fix=base_cfg.repetition_fix,
            repetition_trigger=base_cfg.repetition_trigger,
        )
        hyps = []
        for tokens in sentences:
            if not tokens:
                hyps.append([])
                continue
            res = beam_search(model, tokens, provider, table, sweep_cfg)
            hyps.append(res.best.output_tokens())
        report = eval_mod.bleu_corpus(hyps, refs)
        rows.append((alpha, report.bleu))
        _info("tune-alpha: alpha=%.1f BLEU=%.2f" % (alpha, report.bleu * 100.0))
    body = "alpha\tBLEU\n" + "".join(
        "%.1f\t%.2f\n" % (a, b * 100.0) for a, b in rows
    )
    sys.stdout.write(body)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "tune_alpha.tsv").write_text(body, encoding="utf-8")
        write_effective_config({"decode": {"sweep": list(ALPHA_SWEEP)}}, out, "tune-alpha")
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noov",
        description="Lexicon- and phrase-table-augmented attention NMT pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="split a parallel corpus and build vocabularies")
    p.add_argument("src", help="source-side file, one tokenized sentence per line")
    p.add_argument("tgt", help="target-side file, aligned by line number")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--test-frac", type=float, help="test fraction (default: 0.2)")
    p.add_argument("--dev-frac", type=float,
                   help="dev fraction of the remainder (default: 0.1)")
    p.add_argument("--seed", type=int, help="shuffle seed (default: 0)")
    p.add_argument("--min-count", type=int,
                   help="vocabulary frequency threshold (default: 1, keep all words)")
    p.add_argument("--name", help="corpus label (default: source file stem)")
    p.add_argument("--config", help="run-config JSON (default: none)")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("align", help="induce a global lexicon with EM")
    p.add_argument("--src", action="append", required=True,
                   help="training source file (repeatable)")
    p.add_argument("--tgt", action="append", required=True,
                   help="training target file (repeatable)")
    p.add_argument("--out", required=True, help="output lexicon TSV")
    p.add_argument("--iters", type=int, default=20, help="EM iterations (default: 20)")
    p.add_argument("--smoothing", type=float, default=0.0,
                   help="additive smoothing (default: 0)")
    p.add_argument("--no-null", action="store_true",
                   help="disable the synthetic NULL source token (default: enabled)")
    p.add_argument("--top-k", type=int, help="prune to top-k targets per source (default: keep all)")
    p.add_argument("--min-prob", type=float, default=0.0,
                   help="prune targets below this probability (default: 0)")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("phrasebook", help="validate or query a phrase table")
    p.add_argument("action", choices=("validate", "inspect"))
    p.add_argument("--table", required=True, help="phrase table TSV")
    p.add_argument("--sentence", help="source sentence for inspect (default: none)")
    p.add_argument("--trigger", help="target trigger word for inspect (default: none)")
    p.set_defaults(func=cmd_phrasebook)

    for name in ("train", "finetune"):
        p = sub.add_parser(
            name,
            help="train a model" if name == "train" else "continue from a checkpoint",
        )
        p.add_argument("--train-src", action="append", required=True,
                       help="training source file (repeatable, concatenated)")
        p.add_argument("--train-tgt", action="append", required=True,
                       help="training target file (repeatable, concatenated)")
        p.add_argument("--dev-src", help="development source file (default: none)")
        p.add_argument("--dev-tgt", help="development target file (default: none)")
        p.add_argument("--out-dir", required=True, help="output directory")
        p.add_argument("--hidden-size", type=int, help="hidden size (default: 128)")
        p.add_argument("--layers", type=int, help="LSTM layers (default: 2)")
        p.add_argument("--batch-size", type=int, help="batch size (default: 32)")
        p.add_argument("--dropout", type=float, help="dropout rate (default: 0.2)")
        p.add_argument("--grad-clip", type=float, help="gradient clip norm (default: 5)")
        p.add_argument("--lr", type=float, help="Adam learning rate (default: 0.001)")
        p.add_argument("--max-epochs", type=int, help="epoch budget (default: 100)")
        p.add_argument("--patience", type=int,
                       help="epochs without dev improvement before stopping (default: 5)")
        p.add_argument("--seed", type=int, help="random seed (default: 0)")
        p.add_argument("--config", help="run-config JSON (default: none)")
        if name == "train":
            p.add_argument("--min-count", type=int,
                           help="vocabulary frequency threshold (default: 1)")
            p.add_argument("--src-vocab", help="reuse a saved source vocabulary (default: build)")
            p.add_argument("--tgt-vocab", help="reuse a saved target vocabulary (default: build)")
            p.set_defaults(func=cmd_train)
        else:
            p.add_argument("--init-checkpoint", required=True,
                           help="checkpoint to continue from")
            p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("translate", help="decode a file of sentences")
    p.add_argument("--checkpoint", required=True, help="model checkpoint")
    p.add_argument("--input", required=True, help="source sentences, one per line")
    p.add_argument("--output", required=True, help="output translation file")
    p.add_argument("--lexicon", help="global lexicon TSV (default: none)")
    p.add_argument("--phrase-table", help="phrase table TSV (default: none)")
    p.add_argument("--context-src", help="corpus source side for context lexicons (default: none)")
    p.add_argument("--context-tgt", help="corpus target side for context lexicons (default: none)")
    p.add_argument("--context-iters", type=int, default=20,
                   help="EM iterations for context lexicons (default: 20)")
    p.add_argument("--max-pairs", type=int, default=5000,
                   help="context sub-corpus cap (default: 5000)")
    p.add_argument("--beam", type=int, help="beam size (default: 8)")
    p.add_argument("--alpha", type=float, help="lexicon mixture weight (default: 0.2)")
    p.add_argument("--max-len", type=int,
                   help="decode step limit (default: 2.5*source length+5)")
    p.add_argument("--lexicon-mode", choices=decode_mod.LEXICON_MODES,
                   help="lexicon source (default: context_backoff_global)")
    p.add_argument("--renormalize", choices=decode_mod.RENORMALIZE_MODES,
                   help="lexicon bias renormalization (default: softmax)")
    p.add_argument("--repetition-fix", action=argparse.BooleanOptionalAction,
                   default=None, help="phrase-table repetition repair (default: enabled)")
    p.add_argument("--repetition-trigger", choices=decode_mod.REPETITION_TRIGGERS,
                   help="repetition detector (default: output)")
    p.add_argument("--greedy", action="store_true",
                   help="greedy decoding instead of beam search (default: off)")
    p.add_argument("--scores", help="sidecar TSV of per-line scores (default: none)")
    p.add_argument("--threads", type=int,
                   help="worker threads (default: NOOV_THREADS or 1)")
    p.add_argument("--config", help="run-config JSON (default: none)")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="score translations with BLEU")
    p.add_argument("--hyp", required=True, help="hypothesis file")
    p.add_argument("--ref", required=True, help="reference file")
    p.add_argument("--src", help="source file for length buckets (default: none)")
    p.add_argument("--buckets", default="10,20,30",
                   help="bucket upper bounds (default: 10,20,30)")
    p.add_argument("--smoothing", choices=eval_mod.SMOOTHING_MODES, default="none",
                   help="zero-precision smoothing (default: none)")
    p.add_argument("--out-dir", required=True, help="report directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune-alpha", help="sweep the lexicon mixture weight on dev")
    p.add_argument("--checkpoint", required=True, help="model checkpoint")
    p.add_argument("--dev-src", required=True, help="dev source file")
    p.add_argument("--dev-tgt", required=True, help="dev reference file")
    p.add_argument("--lexicon", help="global lexicon TSV (default: none)")
    p.add_argument("--phrase-table", help="phrase table TSV (default: none)")
    p.add_argument("--context-src", help="corpus source side for context lexicons (default: none)")
    p.add_argument("--context-tgt", help="corpus target side for context lexicons (default: none)")
    p.add_argument("--context-iters", type=int, default=20,
                   help="EM iterations for context lexicons (default: 20)")
    p.add_argument("--max-pairs", type=int, default=5000,
                   help="context sub-corpus cap (default: 5000)")
    p.add_argument("--beam", type=int, help="beam size (default: 8)")
    p.add_argument("--alpha", type=float, help="ignored during the sweep (default: 0.2)")
    p.add_argument("--max-len", type=int,
                   help="decode step limit (default: 2.5*source length+5)")
    p.add_argument("--lexicon-mode", choices=decode_mod.LEXICON_MODES,
                   help="lexicon source (default: context_backoff_global)")
    p.add_argument("--renormalize", choices=decode_mod.RENORMALIZE_MODES,
                   help="lexicon bias renormalization (default: softmax)")
    p.add_argument("--repetition-fix", action=argparse.BooleanOptionalAction,
                   default=None, help="phrase-table repetition repair (default: enabled)")
    p.add_argument("--repetition-trigger", choices=decode_mod.REPETITION_TRIGGERS,
                   help="repetition detector (default: output)")
    p.add_argument("--out-dir", help="optional report directory (default: stdout only)")
    p.add_argument("--config", help="run-config JSON (default: none)")
    p.set_defaults(func=cmd_tune_alpha)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print("noov: error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
