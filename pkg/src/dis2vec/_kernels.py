"""Compiled inner loops for training.

Randomness inside the training loop comes from numba's per-thread generator,
seeded explicitly at the start of each worker's run.
"""

import math

import numpy as np
from numba import njit

DOT_CLAMP = 30.0

MODE_SGNS = 0
MODE_SAMPLE = 1
MODE_OBJECTIVE = 2
MODE_COMBINED = 3

CAT_DD = 0
CAT_NN = 1
CAT_MIXED = 2

STATUS_OK = 0
STATUS_NONFINITE = 1


@njit(cache=True, nogil=True)
def sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@njit(cache=True, nogil=True)
def log_sigmoid(x):
    if x >= 0.0:
        return -math.log1p(math.exp(-x))
    return x - math.log1p(math.exp(x))


@njit(cache=True, nogil=True)
def step(W, C, w, ctxs, labels, lr, grad, work):
    """Ascend ``sum_j log sigma(+/- w . c_j)`` for one word, all gradients at pre-update values.

    ``labels[j]`` is 1 for an attracting context and 0 for a repelling one.
    Returns the objective before the update. ``grad`` (length T) and
    ``work`` (length len(ctxs)) are scratch buffers.
    """
    dim = W.shape[1]
    n = ctxs.shape[0]
    loss = 0.0
    for d in range(dim):
        grad[d] = 0.0
    for j in range(n):
        c = ctxs[j]
        dot = 0.0
        for d in range(dim):
            dot += W[w, d] * C[c, d]
        if labels[j] == 1:
            loss += log_sigmoid(dot)
        else:
            loss += log_sigmoid(-dot)
        if dot > DOT_CLAMP:
            dot = DOT_CLAMP
        elif dot < -DOT_CLAMP:
            dot = -DOT_CLAMP
        g = labels[j] - sigmoid(dot)
        work[j] = g
        for d in range(dim):
            grad[d] += g * C[c, d]
    for j in range(n):
        c = ctxs[j]
        g = lr * work[j]
        for d in range(dim):
            C[c, d] += g * W[w, d]
    for d in range(dim):
        W[w, d] += lr * grad[d]
    return loss


@njit(cache=True, nogil=True)
def alias_draw(support, prob, alias):
    col = np.random.randint(0, support.shape[0])
    if np.random.random() >= prob[col]:
        col = alias[col]
    return support[col]


@njit(cache=True, nogil=True)
def train_shard(W, C, tokens, offsets, epoch_starts, window, k, mode, in_vocab, pi_s, pi_o,
                g_support, g_prob, g_alias, i_support, i_prob, i_alias, o_support, o_prob, o_alias,
                lr0, lr_min, total_pairs, seed, losses, totals, counts, failure):
    """Run every epoch of one worker's sentences over shared ``W`` and ``C``.

    Sentences ``epoch_starts[e]:epoch_starts[e+1]`` (indices into
    ``offsets``) form epoch ``e``. Per-category objective sums and pair
    counts go to ``losses``/``counts`` (epochs x 3); ``totals`` receives a
    running per-epoch sum kept separately. On a non-finite objective the
    run stops and ``failure`` holds (epoch, pair index, word, context).
    """
    np.random.seed(seed)
    dim = W.shape[1]
    grad = np.empty(dim)
    work = np.empty(k + 1)
    ctxs = np.empty(k + 1, dtype=np.int64)
    labels = np.zeros(k + 1, dtype=np.int64)
    labels[0] = 1
    one_ctx = np.empty(1, dtype=np.int64)
    one_label = np.zeros(1, dtype=np.int64)
    done = 0
    n_epochs = epoch_starts.shape[0] - 1
    for e in range(n_epochs):
        for s in range(epoch_starts[e], epoch_starts[e + 1]):
            lo = offsets[s]
            hi = offsets[s + 1]
            for i in range(lo, hi):
                w = tokens[i]
                j_lo = max(lo, i - window)
                j_hi = min(hi, i + window + 1)
                for j in range(j_lo, j_hi):
                    if j == i:
                        continue
                    c = tokens[j]
                    lr = lr0 - (lr0 - lr_min) * done / total_pairs
                    if lr < lr_min:
                        lr = lr_min
                    if in_vocab[w] and in_vocab[c]:
                        cat = CAT_DD
                    elif in_vocab[w] or in_vocab[c]:
                        cat = CAT_MIXED
                    else:
                        cat = CAT_NN
                    if cat == CAT_MIXED and (mode == MODE_OBJECTIVE or mode == MODE_COMBINED):
                        one_ctx[0] = c
                        one_label[0] = 1 if np.random.random() >= pi_o else 0
                        loss = step(W, C, w, one_ctx, one_label, lr, grad, work)
                    else:
                        ctxs[0] = c
                        if cat == CAT_DD and (mode == MODE_SAMPLE or mode == MODE_COMBINED):
                            for n in range(1, k + 1):
                                if np.random.random() < pi_s:
                                    ctxs[n] = alias_draw(o_support, o_prob, o_alias)
                                else:
                                    ctxs[n] = alias_draw(i_support, i_prob, i_alias)
                        else:
                            for n in range(1, k + 1):
                                ctxs[n] = alias_draw(g_support, g_prob, g_alias)
                        loss = step(W, C, w, ctxs, labels, lr, grad, work)
                    if not math.isfinite(loss):
                        failure[0] = e
                        failure[1] = done
                        failure[2] = w
                        failure[3] = c
                        return STATUS_NONFINITE
                    losses[e, cat] += loss
                    totals[e] += loss
                    counts[e, cat] += 1
                    done += 1
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(C))):
            failure[0] = e
            failure[1] = done
            failure[2] = -1
            failure[3] = -1
            return STATUS_NONFINITE
    return STATUS_OK
