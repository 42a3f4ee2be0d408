"""Encoder-decoder assembly, teacher-forced training, checkpoints.

A 2-layer biLSTM encoder feeds a 2-layer attention decoder through a
learned tanh bridge. Training is teacher-forced cross-entropy with Adam
and global-norm clipping; everything is reproducible from (seed, data,
config) on one platform.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, asdict, field

import numpy as np

from . import autodiff as ad
from .autodiff import Var
from . import neural
from .neural import EncoderStates
from .corpus import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    ParallelCorpus,
    SPECIAL_TOKENS,
    Vocabulary,
    encode_sentence,
)

log = logging.getLogger("noov.model")

CHECKPOINT_MAGIC = b"NOOV"
CHECKPOINT_VERSION = 1


class ModelError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    hidden_size: int = 128
    layers: int = 2
    batch_size: int = 32
    dropout: float = 0.2
    grad_clip: float = 5.0
    lr: float = 0.001
    max_epochs: int = 100
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.hidden_size < 1 or self.layers < 1 or self.batch_size < 1:
            raise ModelError("sizes must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ModelError("dropout must be in [0,1)")
        if self.grad_clip <= 0 or self.lr <= 0:
            raise ModelError("grad_clip and lr must be positive")
        if self.max_epochs < 0 or self.patience < 0:
            raise ModelError("max_epochs and patience must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ModelError("unknown model config keys: %s" % sorted(unknown))
        return cls(**d)


@dataclass
class DecoderState:
    """Per-layer (hidden, cell) pairs; the top hidden queries attention."""

    layers: list[tuple[Var, Var]]

    @property
    def top_hidden(self) -> Var:
        return self.layers[-1][0]


@dataclass
class ModelCheckpoint:
    config: ModelConfig
    src_vocab: Vocabulary
    tgt_vocab: Vocabulary
    params: dict[str, np.ndarray]
    epoch: int = 0
    dev_loss: float = float("nan")
    version: int = CHECKPOINT_VERSION
    history: list = field(default_factory=list)  # (epoch, train_loss, dev_loss)


def _make_batch(pairs, src_vocab: Vocabulary, tgt_vocab: Vocabulary):
    """Right-padded id matrices plus masks for a list of sentence pairs."""
    batch = len(pairs)
    m = max(len(p.source) for p in pairs)
    n = max(len(p.target) for p in pairs) + 1  # room for EOS
    src_ids = np.full((batch, m), PAD_ID, dtype=np.int64)
    src_mask = np.zeros((batch, m), dtype=np.float64)
    tgt_in = np.full((batch, n), PAD_ID, dtype=np.int64)
    tgt_out = np.full((batch, n), PAD_ID, dtype=np.int64)
    tgt_w = np.zeros((batch, n), dtype=np.float64)
    for r, p in enumerate(pairs):
        s = encode_sentence(p.source, src_vocab)
        t = encode_sentence(p.target, tgt_vocab)
        src_ids[r, : len(s)] = s
        src_mask[r, : len(s)] = 1.0
        tgt_in[r, 0] = BOS_ID
        tgt_in[r, 1 : len(t) + 1] = t
        tgt_out[r, : len(t)] = t
        tgt_out[r, len(t)] = EOS_ID
        tgt_w[r, : len(t) + 1] = 1.0
    return src_ids, src_mask, tgt_in, tgt_out, tgt_w


class NoovModel:
    """The assembled translation model over fixed vocabularies."""

    def __init__(self, config: ModelConfig, src_vocab: Vocabulary,
                 tgt_vocab: Vocabulary, params: dict[str, np.ndarray]):
        self.config = config
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.params = params
        self.dtype = next(iter(params.values())).dtype.type
        self.rng = np.random.default_rng(config.seed)
        self.adam = neural.AdamState(lr=config.lr)
        self.history: list[tuple[int, float, float]] = []
        self._rebind()

    @classmethod
    def create(cls, config: ModelConfig, src_vocab: Vocabulary,
               tgt_vocab: Vocabulary, dtype=np.float32) -> "NoovModel":
        init_rng = np.random.default_rng(config.seed)
        params = neural.init_parameter_arrays(
            len(src_vocab), len(tgt_vocab), config.hidden_size, config.layers,
            init_rng, dtype=dtype,
        )
        return cls(config, src_vocab, tgt_vocab, params)

    def _rebind(self):
        # Leaves alias the parameter arrays, so in-place Adam updates are
        # visible to every graph built afterwards.
        self.weights = {name: ad.leaf(arr) for name, arr in self.params.items()}

    def _zero_grad(self):
        for v in self.weights.values():
            v.grad = None

    # ------------------------------------------------------------------
    # forward pieces
    # ------------------------------------------------------------------

    def _encode_ids(self, src_ids: np.ndarray, src_mask, dropout_masks) -> EncoderStates:
        positions = src_ids.shape[1]
        emb = [ad.rows(self.weights["src_emb"], src_ids[:, j]) for j in range(positions)]
        return neural.bilstm_encode(
            emb, self.weights, self.config.layers, mask=src_mask,
            dropout_masks=dropout_masks,
        )

    def _bridge(self, enc: EncoderStates) -> DecoderState:
        cat = ad.concat_cols([enc.final_forward, enc.final_backward])
        layers = []
        for layer in range(self.config.layers):
            h = ad.tanh(ad.matmul(cat, self.weights["bridge_l%d_wh" % layer]))
            c = ad.tanh(ad.matmul(cat, self.weights["bridge_l%d_wc" % layer]))
            layers.append((h, c))
        return DecoderState(layers)

    def _decoder_step(self, state: DecoderState, prev_emb: Var, enc: EncoderStates,
                      ctx_mask=None, layer_masks=None):
        att = neural.attention_scores(enc, state.top_hidden, prev_emb, self.weights)
        ctx = neural.attention_context(att, enc)
        if ctx_mask is not None:
            ctx = ad.mul(ctx, ad.leaf(ctx_mask))
        x = ad.concat_cols([prev_emb, ctx])
        new_layers = []
        for layer in range(self.config.layers):
            if layer > 0 and layer_masks is not None:
                x = ad.mul(x, ad.leaf(layer_masks[layer - 1]))
            h, c = neural.lstm_cell(
                x, state.layers[layer][0], state.layers[layer][1],
                self.weights["dec_l%d_wx" % layer],
                self.weights["dec_l%d_wh" % layer],
                self.weights["dec_l%d_b" % layer],
            )
            new_layers.append((h, c))
            x = h
        logits = ad.add(ad.matmul(x, self.weights["out_w"]), self.weights["out_b"])
        return logits, att, DecoderState(new_layers)

    def loss_graph(self, pairs, train: bool) -> tuple[Var, float]:
        """Teacher-forced mean per-token NLL over a batch of pairs.

        Dropout (training only) uses one mask per site per graph, applied
        across timesteps: encoder between-layer inputs, decoder
        between-layer inputs, and the attention context.
        """
        if not pairs:
            raise ModelError("empty batch")
        src_ids, src_mask, tgt_in, tgt_out, tgt_w = _make_batch(
            pairs, self.src_vocab, self.tgt_vocab
        )
        cfg = self.config
        batch = src_ids.shape[0]
        hidden = cfg.hidden_size
        use_dropout = train and cfg.dropout > 0.0
        enc_masks = None
        ctx_mask = None
        layer_masks = None
        if use_dropout:
            draw = lambda w: neural.dropout_mask((batch, w), cfg.dropout, self.rng, self.dtype)
            enc_masks = [(draw(hidden), draw(hidden)) for _ in range(cfg.layers - 1)]
            layer_masks = [draw(hidden) for _ in range(cfg.layers - 1)]
            ctx_mask = draw(2 * hidden)
        enc = self._encode_ids(src_ids, src_mask, enc_masks)
        state = self._bridge(enc)
        loss_sum = None
        for i in range(tgt_in.shape[1]):
            prev_emb = ad.rows(self.weights["tgt_emb"], tgt_in[:, i])
            logits, _, state = self._decoder_step(
                state, prev_emb, enc, ctx_mask=ctx_mask, layer_masks=layer_masks
            )
            step = ad.cross_entropy_rows(logits, tgt_out[:, i], tgt_w[:, i])
            loss_sum = step if loss_sum is None else ad.add(loss_sum, step)
        n_tokens = float(tgt_w.sum())
        return ad.scale(loss_sum, 1.0 / n_tokens), n_tokens

    # ------------------------------------------------------------------
    # inference
    # ------------------------------------------------------------------

    def encode(self, src_ids) -> EncoderStates:
        """Encode one sentence (list of ids) without dropout."""
        if len(src_ids) == 0:
            raise ModelError("cannot encode an empty sentence")
        ids = np.asarray([src_ids], dtype=np.int64)
        return self._encode_ids(ids, None, None)

    def initial_state(self, enc: EncoderStates) -> DecoderState:
        return self._bridge(enc)

    def decode_step(self, state: DecoderState, prev_token_id: int, enc: EncoderStates):
        """One decoding step; returns (distribution over the target
        vocabulary, attention weights, new state) as plain arrays."""
        prev_emb = ad.rows(self.weights["tgt_emb"], np.asarray([prev_token_id]))
        logits, att, new_state = self._decoder_step(state, prev_emb, enc)
        dist = ad.softmax_rows(logits)
        return dist.data[0], att.data[0], new_state

    # ------------------------------------------------------------------
    # training
    # ------------------------------------------------------------------

    def train_step(self, pairs) -> float:
        """One forward/backward/clip/Adam update; returns the batch loss."""
        self._zero_grad()
        loss, _ = self.loss_graph(pairs, train=True)
        ad.backward(loss)
        grads = {name: v.grad for name, v in self.weights.items() if v.grad is not None}
        grads, _ = neural.clip_gradients(grads, self.config.grad_clip)
        neural.adam_step(self.params, grads, self.adam)
        return float(loss.data)

    def evaluate_loss(self, pairs) -> float:
        """Mean per-token NLL without dropout or updates."""
        if not pairs:
            raise ModelError("cannot evaluate on an empty set")
        total = 0.0
        tokens = 0.0
        for start in range(0, len(pairs), self.config.batch_size):
            chunk = pairs[start : start + self.config.batch_size]
            loss, n = self.loss_graph(chunk, train=False)
            total += float(loss.data) * n
            tokens += n
        return total / tokens

    def _batches(self, corpus):
        """Length-bucketed batches: sort by source length, chunk."""
        order = sorted(range(len(corpus)), key=lambda i: (len(corpus[i].source), i))
        size = self.config.batch_size
        return [
            [corpus[i] for i in order[start : start + size]]
            for start in range(0, len(order), size)
        ]

    def train(self, train_corpus: ParallelCorpus,
              dev_corpus: ParallelCorpus | None = None) -> ModelCheckpoint:
        """Epoch loop with dev-loss patience; returns the best checkpoint.

        The selection includes the untrained model (epoch 0). When no dev
        corpus is given, the train corpus doubles as the selection set.
        """
        if len(train_corpus) == 0:
            raise ModelError("empty training corpus")
        cfg = self.config
        dev = dev_corpus if dev_corpus is not None and len(dev_corpus) > 0 else train_corpus
        dev_pairs = list(dev)
        batches = self._batches(train_corpus)

        best_loss = self.evaluate_loss(dev_pairs)
        best_params = {k: v.copy() for k, v in self.params.items()}
        best_epoch = 0
        self.history = [(0, float("nan"), best_loss)]
        log.info("epoch=0 dev_loss=%.6f (untrained)", best_loss)
        bad_epochs = 0
        for epoch in range(1, cfg.max_epochs + 1):
            order = self.rng.permutation(len(batches))
            train_loss = 0.0
            for bi in order:
                train_loss += self.train_step(batches[bi])
            train_loss /= max(1, len(batches))
            dev_loss = self.evaluate_loss(dev_pairs)
            self.history.append((epoch, train_loss, dev_loss))
            log.info("epoch=%d train_loss=%.6f dev_loss=%.6f", epoch, train_loss, dev_loss)
            if dev_loss < best_loss:
                best_loss = dev_loss
                best_params = {k: v.copy() for k, v in self.params.items()}
                best_epoch = epoch
                bad_epochs = 0
            else:
                bad_epochs += 1
            if bad_epochs >= cfg.patience:
                break
        return ModelCheckpoint(
            config=cfg, src_vocab=self.src_vocab, tgt_vocab=self.tgt_vocab,
            params=best_params, epoch=best_epoch, dev_loss=best_loss,
            history=list(self.history),
        )


def model_from_checkpoint(ckpt: ModelCheckpoint) -> NoovModel:
    params = {k: v.copy() for k, v in ckpt.params.items()}
    return NoovModel(ckpt.config, ckpt.src_vocab, ckpt.tgt_vocab, params)


def fine_tune(ckpt: ModelCheckpoint, new_train: ParallelCorpus,
              new_dev: ParallelCorpus | None = None,
              config: ModelConfig | None = None) -> ModelCheckpoint:
    """Continue training from a checkpoint with a fresh optimizer.

    Vocabularies are fixed by the checkpoint; unseen tokens embed as UNK
    while surface forms remain available to the lexicon path.
    """
    cfg = config if config is not None else ckpt.config
    model = NoovModel(cfg, ckpt.src_vocab, ckpt.tgt_vocab,
                      {k: v.copy() for k, v in ckpt.params.items()})
    return model.train(new_train, new_dev)


# ----------------------------------------------------------------------
# checkpoint serialization
# ----------------------------------------------------------------------


def _vocab_rows(vocab: Vocabulary) -> list:
    return [[tok, vocab.counts[tok]] for tok in vocab.id_to_token]


def _vocab_from_rows(rows) -> Vocabulary:
    if [r[0] for r in rows[:4]] != list(SPECIAL_TOKENS):
        raise CheckpointError("vocabulary rows must start with the special tokens")
    return Vocabulary([(tok, int(cnt)) for tok, cnt in rows[4:]])


def save_checkpoint(ckpt: ModelCheckpoint, path) -> None:
    """Write magic, version, JSON header, then raw little-endian float32
    tensors in manifest order."""
    manifest = []
    blobs = []
    offset = 0
    for name, arr in ckpt.params.items():
        raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(raw)
        offset += len(raw)
    header = {
        "config": ckpt.config.to_dict(),
        "src_vocab": _vocab_rows(ckpt.src_vocab),
        "tgt_vocab": _vocab_rows(ckpt.tgt_vocab),
        "metadata": {"epoch": ckpt.epoch, "dev_loss": ckpt.dev_loss,
                     "history": [list(h) for h in ckpt.history]},
        "manifest": manifest,
    }
    header_bytes = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", CHECKPOINT_VERSION))
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        for raw in blobs:
            f.write(raw)


def load_checkpoint(path) -> ModelCheckpoint:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("%s: bad magic bytes (not a checkpoint)" % path)
    version = struct.unpack("<I", blob[4:8])[0]
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            "%s: unsupported checkpoint version %d (supported: %d)"
            % (path, version, CHECKPOINT_VERSION)
        )
    header_len = struct.unpack("<I", blob[8:12])[0]
    header_end = 12 + header_len
    if len(blob) < header_end:
        raise CheckpointError("%s: truncated header" % path)
    header = json.loads(blob[12:header_end].decode("utf-8"))
    config = ModelConfig.from_dict(header["config"])
    src_vocab = _vocab_from_rows(header["src_vocab"])
    tgt_vocab = _vocab_from_rows(header["tgt_vocab"])
    params = {}
    data = blob[header_end:]
    for entry in header["manifest"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        end = start + 4 * count
        if end > len(data):
            raise CheckpointError(
                "%s: truncated tensor data for %r" % (path, entry["name"])
            )
        arr = np.frombuffer(data[start:end], dtype="<f4").reshape(shape)
        params[entry["name"]] = arr.astype(np.float32)
    meta = header.get("metadata", {})
    return ModelCheckpoint(
        config=config, src_vocab=src_vocab, tgt_vocab=tgt_vocab, params=params,
        epoch=int(meta.get("epoch", 0)), dev_loss=float(meta.get("dev_loss", float("nan"))),
        version=version,
        history=[tuple(h) for h in meta.get("history", [])],
    )
