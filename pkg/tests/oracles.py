"""Independent brute-force oracles used to cross-check the implementation.

Everything here is written directly from the mathematical definitions,
without importing the production algorithms (models are driven only
through their public step functions where unavoidable).
"""

import math

import numpy as np


# ----------------------------------------------------------------------
# IBM Model 1 EM, nested-loop form
# ----------------------------------------------------------------------


def brute_force_ibm1(token_pairs, iterations, null_word=True):
    """EM for t(target|source) on [(src_tokens, tgt_tokens), ...].

    Uniform init over each source token's co-occurring target types;
    E-step over token occurrences; M-step renormalizes per source token.
    Returns ({src: {tgt: prob}}, [loglik per iteration]).
    """
    corpus = []
    for src, tgt in token_pairs:
        src = (["<null>"] if null_word else []) + list(src)
        corpus.append((src, list(tgt)))

    cooc = {}
    for src, tgt in corpus:
        for s in src:
            cooc.setdefault(s, set()).update(tgt)
    t = {}
    for s in cooc:
        for w in cooc[s]:
            t[(s, w)] = 1.0 / len(cooc[s])

    logliks = []
    for _ in range(iterations):
        count = {}
        total = {}
        ll = 0.0
        for src, tgt in corpus:
            for w in tgt:
                z = 0.0
                for s in src:
                    z = z + t[(s, w)]
                ll = ll + math.log(z) - math.log(len(src))
                for s in src:
                    c = t[(s, w)] / z
                    count[(s, w)] = count.get((s, w), 0.0) + c
                    total[s] = total.get(s, 0.0) + c
        for key in count:
            t[key] = count[key] / total[key[0]]
        logliks.append(ll)

    table = {}
    for (s, w), p in t.items():
        if s == "<null>":
            continue
        table.setdefault(s, {})[w] = p
    return table, logliks


# ----------------------------------------------------------------------
# scalar LSTM cell (gate layout: input, forget, candidate, output)
# ----------------------------------------------------------------------


def _sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x))


def scalar_lstm_cell(x, h, c, wx, wh, b):
    """Element-by-element LSTM step on 1-D vectors."""
    hidden = len(h)
    pre = [0.0] * (4 * hidden)
    for k in range(4 * hidden):
        acc = b[k]
        for j in range(len(x)):
            acc += x[j] * wx[j][k]
        for j in range(hidden):
            acc += h[j] * wh[j][k]
        pre[k] = acc
    h_new = [0.0] * hidden
    c_new = [0.0] * hidden
    for k in range(hidden):
        i = _sigmoid(pre[k])
        f = _sigmoid(pre[hidden + k])
        g = math.tanh(pre[2 * hidden + k])
        o = _sigmoid(pre[3 * hidden + k])
        c_new[k] = f * c[k] + i * g
        h_new[k] = o * math.tanh(c_new[k])
    return h_new, c_new


def scalar_unilstm_scan(xs, wx, wh, b, hidden, reverse=False):
    """Run the scalar cell over a sequence from a zero state."""
    h = [0.0] * hidden
    c = [0.0] * hidden
    states = [None] * len(xs)
    order = range(len(xs) - 1, -1, -1) if reverse else range(len(xs))
    for j in order:
        h, c = scalar_lstm_cell(list(xs[j]), h, c, wx, wh, b)
        states[j] = list(h)
    return states, h


# ----------------------------------------------------------------------
# scalar Adam
# ----------------------------------------------------------------------


def scalar_adam_run(theta0, grads_per_step, lr=0.001, b1=0.9, b2=0.999, eps=1e-8):
    """Hand-stepped Adam on a flat list of parameters."""
    theta = list(theta0)
    m = [0.0] * len(theta)
    v = [0.0] * len(theta)
    for step, grads in enumerate(grads_per_step, start=1):
        for k in range(len(theta)):
            g = grads[k]
            m[k] = b1 * m[k] + (1 - b1) * g
            v[k] = b2 * v[k] + (1 - b2) * g * g
            m_hat = m[k] / (1 - b1**step)
            v_hat = v[k] / (1 - b2**step)
            theta[k] = theta[k] - lr * m_hat / (math.sqrt(v_hat) + eps)
    return theta


# ----------------------------------------------------------------------
# plain seq2seq decoding (no lexicon, no repetition handling)
# ----------------------------------------------------------------------

BOS, EOS = 1, 2


def plain_greedy(model, src_tokens, max_len):
    """Argmax decoding straight off the decoder distribution."""
    src_ids = [model.src_vocab.id(t) for t in src_tokens]
    enc = model.encode(src_ids)
    state = model.initial_state(enc)
    ids = []
    score = 0.0
    prev = BOS
    for _ in range(max_len):
        dist, _, state = model.decode_step(state, prev, enc)
        tid = int(np.argmax(dist))
        ids.append(tid)
        score += math.log(float(dist[tid]))
        if tid == EOS:
            break
        prev = tid
    return ids, score


def plain_beam(model, src_tokens, beam_size, max_len):
    """Standard length-wise beam over the decoder distribution alone.

    Candidates sort by (-cumulative score, token tuple); hypotheses
    finish on EOS or the step limit; final ranking is score divided by
    the number of scored tokens.
    """
    src_ids = [model.src_vocab.id(t) for t in src_tokens]
    enc = model.encode(src_ids)
    live = [([], 0.0, model.initial_state(enc))]
    done = []
    for _ in range(max_len):
        if not live:
            break
        candidates = []
        for ids, score, state in live:
            prev = ids[-1] if ids else BOS
            dist, _, new_state = model.decode_step(state, prev, enc)
            dist = np.asarray(dist, dtype=np.float64)
            order = np.argsort(-dist, kind="stable")[:beam_size]
            for tid in order:
                p = float(dist[tid])
                if p <= 0.0:
                    continue
                candidates.append(
                    (ids + [int(tid)], score + math.log(p), new_state)
                )
        candidates.sort(key=lambda c: (-c[1], tuple(c[0])))
        live = []
        for ids, score, state in candidates[:beam_size]:
            if ids[-1] == EOS:
                done.append((ids, score))
            else:
                live.append((ids, score, state))
    done.extend((ids, score) for ids, score, _ in live)
    done.sort(key=lambda c: (-(c[1] / max(1, len(c[0]))), tuple(c[0])))
    return done[0]


# ----------------------------------------------------------------------
# BLEU counting
# ----------------------------------------------------------------------


def clipped_ngram_counts(hyp_tokens, ref_tokens, n):
    """(clipped matches, candidate total) for one sentence and order n."""
    def grams(toks):
        out = {}
        for i in range(len(toks) - n + 1):
            g = tuple(toks[i : i + n])
            out[g] = out.get(g, 0) + 1
        return out

    hyp = grams(hyp_tokens)
    ref = grams(ref_tokens)
    total = sum(hyp.values())
    match = 0
    for g, c in hyp.items():
        match += min(c, ref.get(g, 0))
    return match, total
