"""SGD training loop for the blended-input NEG objective.

Deterministic mode (threads=1) processes positions in corpus order with a
seeded per-shard RNG; parallel mode shards the token stream and lets
updates race (word2vec-style lock-free approximation). All numeric tests
run deterministic mode.
"""

from __future__ import annotations

import logging
import math
import time

import numpy as np
from numba import njit, prange, set_num_threads

from morphvec.corpus import TokenStream, build_noise_table
from morphvec.model import EmbeddingModel, TrainingConfig, init_model
from morphvec.relation import RelationMatrix

logger = logging.getLogger(__name__)

LR_FLOOR_RATIO = 1e-4

# shared RNG protocol: 64-bit LCG stepped per draw, splitmix-style seeding
LCG_MULT = 6364136223846793005
LCG_ADD = 1442695040888963407
_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, epoch: int, shard: int) -> int:
    """Derive one shard's starting RNG state (python-int twin of the
    in-kernel seeding; kept in sync with _mix_seed below)."""
    x = (seed * 0x9E3779B97F4A7C15 + epoch * 0xBF58476D1CE4E5B9
         + shard * 0x94D049BB133111EB + 1) & _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


@njit(cache=True)
def _mix_seed(seed, epoch, shard):
    x = np.uint64(seed) * np.uint64(0x9E3779B97F4A7C15)
    x += np.uint64(epoch) * np.uint64(0xBF58476D1CE4E5B9)
    x += np.uint64(shard) * np.uint64(0x94D049BB133111EB) + np.uint64(1)
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    return x


@njit(cache=True)
def _lcg_next(state):
    return state * np.uint64(LCG_MULT) + np.uint64(LCG_ADD)


@njit(cache=True)
def _uniform01(state):
    # 53-bit mantissa draw in [0, 1)
    return (state >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _bsearch_cum(cum, u):
    # smallest index with cum[idx] > u
    lo = 0
    hi = cum.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return lo


@njit(cache=True, parallel=True)
def _train_epoch(tokens, indptr, nbrs, wts, M, Mout, c1, c2, bucket_of, cum,
                 window, k_neg, lr0, total_steps, steps_base, seed, epoch,
                 n_shards, freeze_relation, freeze_coeffs, dynamic_window,
                 loss_out, record_n, fail_step):
    T = tokens.shape[0]
    D = M.shape[1]
    loss_total = 0.0
    steps_total = 0
    for shard in prange(n_shards):
        lo = (T * shard) // n_shards
        hi = (T * (shard + 1)) // n_shards
        state = _mix_seed(seed, epoch, shard)
        e = np.empty(D)
        vr = np.empty(D)
        v = np.empty(D)
        gbuf = np.empty(k_neg + 1)
        outw = np.empty(k_neg + 1, np.int64)
        local_step = 0
        loss_shard = 0.0
        for pos in range(lo, hi):
            if fail_step[0] >= 0:
                break
            center = tokens[pos]
            win = window
            if dynamic_window:
                state = _lcg_next(state)
                win = 1 + int(state >> np.uint64(11)) % window
            jlo = pos - win
            if jlo < 0:
                jlo = 0
            jhi = pos + win
            if jhi > T - 1:
                jhi = T - 1
            rlo = indptr[center]
            rhi = indptr[center + 1]
            bk = bucket_of[center]
            for ctx in range(jlo, jhi + 1):
                if ctx == pos:
                    continue
                gstep = steps_base + local_step * n_shards
                frac = 1.0 - gstep / total_steps
                if frac < LR_FLOOR_RATIO:
                    frac = LR_FLOOR_RATIO
                lr = lr0 * frac

                a1 = c1[bk]
                a2 = c2[bk]
                for d in range(D):
                    vr[d] = 0.0
                for x in range(rlo, rhi):
                    j = nbrs[x]
                    w = wts[x]
                    for d in range(D):
                        vr[d] += w * M[j, d]
                for d in range(D):
                    v[d] = a1 * M[center, d] + a2 * vr[d]

                outw[0] = tokens[ctx]
                for r in range(1, k_neg + 1):
                    state = _lcg_next(state)
                    outw[r] = _bsearch_cum(cum, _uniform01(state))

                loss = 0.0
                for r in range(k_neg + 1):
                    o = outw[r]
                    dot = 0.0
                    for d in range(D):
                        dot += Mout[o, d] * v[d]
                    sig = 1.0 / (1.0 + math.exp(-dot))
                    if r == 0:
                        gbuf[r] = 1.0 - sig
                        loss += math.log(sig)
                    else:
                        gbuf[r] = -sig
                        loss += math.log(1.0 - sig)

                if not np.isfinite(loss):
                    fail_step[0] = gstep
                    break

                for d in range(D):
                    e[d] = 0.0
                for r in range(k_neg + 1):
                    o = outw[r]
                    gr = gbuf[r]
                    for d in range(D):
                        e[d] += gr * Mout[o, d]
                for r in range(k_neg + 1):
                    o = outw[r]
                    glr = lr * gbuf[r]
                    for d in range(D):
                        Mout[o, d] += glr * v[d]

                gc1 = 0.0
                for d in range(D):
                    gc1 += e[d] * M[center, d]
                gc2 = 0.0
                for x in range(rlo, rhi):
                    j = nbrs[x]
                    w = wts[x]
                    dj = 0.0
                    for d in range(D):
                        dj += e[d] * M[j, d]
                    gc2 += w * dj
                    coef = lr * a2 * w
                    for d in range(D):
                        M[j, d] += coef * e[d]
                    if not freeze_relation:
                        wts[x] = w + lr * a2 * dj
                coefc = lr * a1
                for d in range(D):
                    M[center, d] += coefc * e[d]
                if not freeze_coeffs:
                    c1[bk] += lr * gc1
                    c2[bk] += lr * gc2

                if record_n > 0 and gstep < record_n:
                    loss_out[gstep] = loss
                loss_shard += loss
                local_step += 1
        loss_total += loss_shard
        steps_total += local_step
    return steps_total, loss_total


class NonFiniteParameterError(RuntimeError):
    """Training produced a non-finite parameter; carries the step index."""

    def __init__(self, step: int):
        super().__init__(f"non-finite training loss at step {step}")
        self.step = step


def count_steps(n_tokens: int, window: int) -> int:
    """Exact number of (center, context) pairs in one static-window epoch."""
    t = np.arange(n_tokens, dtype=np.int64)
    return int(np.sum(np.minimum(t + window, n_tokens - 1)
                      - np.maximum(t - window, 0)))


def train(stream: TokenStream, relation: RelationMatrix, config: TrainingConfig,
          record_losses: bool = False) -> EmbeddingModel:
    """Train a fresh model over the stream; mutates ``relation`` weights
    in place unless ``config.freeze_relation`` is set.

    With ``record_losses`` (deterministic mode only) the per-step objective
    values are kept on ``model.step_losses``.
    """
    if len(stream) == 0:
        raise ValueError("token stream is empty")
    if len(relation) != len(stream.vocab):
        raise ValueError("relation matrix does not cover this vocabulary")
    model = init_model(stream.vocab, config)
    noise = build_noise_table(stream.vocab)

    n_shards = config.threads
    if record_losses and n_shards != 1:
        raise ValueError("per-step loss recording requires deterministic mode")
    set_num_threads(max(1, min(n_shards, _available_threads())))

    per_epoch = count_steps(len(stream), config.window)
    total_steps = config.epochs * per_epoch
    record_n = total_steps if record_losses else 0
    loss_out = np.zeros(record_n if record_n else 1)
    fail_step = np.full(1, -1, dtype=np.int64)

    steps_done = 0
    t_start = time.perf_counter()
    for epoch in range(config.epochs):
        t0 = time.perf_counter()
        steps, loss_sum = _train_epoch(
            stream.tokens, relation.indptr, relation.neighbors, relation.weights,
            model.M, model.M_out, model.c1, model.c2, model.bucket_of,
            noise.cumulative, config.window, config.negatives, config.lr,
            total_steps, steps_done, config.seed, epoch, n_shards,
            config.freeze_relation, config.freeze_coeffs, config.dynamic_window,
            loss_out, record_n, fail_step)
        dt = time.perf_counter() - t0
        if fail_step[0] >= 0:
            raise NonFiniteParameterError(int(fail_step[0]))
        if not model.all_finite():
            raise NonFiniteParameterError(steps_done + steps)
        steps_done += steps
        model.epoch_losses.append(loss_sum / max(steps, 1))
        wps = len(stream) / dt if dt > 0 else float("inf")
        logger.info("epoch %d: %d steps, mean objective %.5f, %.0f words/s",
                    epoch, steps, model.epoch_losses[-1], wps)
    model.train_seconds = time.perf_counter() - t_start
    if record_losses:
        model.step_losses = loss_out
    return model


def _available_threads() -> int:
    import numba

    return numba.config.NUMBA_NUM_THREADS
