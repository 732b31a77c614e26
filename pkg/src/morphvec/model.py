"""Model state and the per-example math of the blended-input NEG objective.

The input representation of a center word t is

    v = c1[bucket(t)] * M[t] + c2[bucket(t)] * sum_j s_j * M[n_j]

over t's relation row (n_j, s_j); the NEG objective scores it against one
observed output word and k noise words through the output matrix. All
gradients here are ascent directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from morphvec.corpus import Vocabulary
from morphvec.morphology import MorphKind, MorphResources
from morphvec.relation import RelationMatrix, SimilarityIndex, normalize_row


class NoCandidatesError(ValueError):
    """Raised when an unknown word has zero similarity to every vocab word."""


@dataclass
class TrainingConfig:
    """Hyperparameters; ``window`` is the half-window N (2N+1 total)."""

    dim: int = 100
    window: int = 5
    negatives: int = 3
    buckets: int = 1000
    lr: float = 0.025
    epochs: int = 1
    seed: int = 1
    freeze_relation: bool = False
    freeze_coeffs: bool = False
    c1_init: float = 0.5
    c2_init: float = 0.5
    dynamic_window: bool = False
    subsample: float = 0.0
    threads: int = 1

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.buckets < 1:
            raise ValueError("buckets must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


def assign_buckets(vocab: Vocabulary, b: int) -> np.ndarray:
    """Partition frequency-ranked words into b contiguous buckets of
    roughly equal total frequency.

    Words are poured into bucket i until its summed frequency reaches
    total/b, except that a bucket never takes so many words that a later
    bucket would stay empty.
    """
    V = len(vocab)
    if b > V:
        raise ValueError(f"bucket count {b} exceeds vocabulary size {V}")
    target = vocab.total_tokens / b
    bucket_of = np.empty(V, dtype=np.int32)
    bucket = 0
    acc = 0.0
    for i, count in enumerate(vocab.counts):
        bucket_of[i] = bucket
        acc += float(count)
        words_left = V - i - 1
        buckets_left = b - bucket - 1
        if bucket < b - 1 and (acc >= target or words_left <= buckets_left):
            bucket += 1
            acc = 0.0
    return bucket_of


@dataclass
class EmbeddingModel:
    """Input matrix M, output matrix M_out, and per-bucket blend weights."""

    M: np.ndarray
    M_out: np.ndarray
    c1: np.ndarray
    c2: np.ndarray
    bucket_of: np.ndarray
    dim: int
    epoch_losses: list[float] = field(default_factory=list)
    step_losses: np.ndarray | None = None
    train_seconds: float = 0.0

    def __len__(self) -> int:
        return self.M.shape[0]

    def all_finite(self) -> bool:
        return bool(np.isfinite(self.M).all() and np.isfinite(self.M_out).all()
                    and np.isfinite(self.c1).all() and np.isfinite(self.c2).all())


def init_model(vocab: Vocabulary, config: TrainingConfig) -> EmbeddingModel:
    """Fresh model: M uniform in [-0.5/D, 0.5/D], M_out zero, shared
    coefficient inits per bucket."""
    V = len(vocab)
    D = config.dim
    rng = np.random.RandomState(config.seed)
    M = rng.uniform(-0.5 / D, 0.5 / D, size=(V, D))
    M_out = np.zeros((V, D))
    b = config.buckets
    return EmbeddingModel(
        M=M,
        M_out=M_out,
        c1=np.full(b, config.c1_init, dtype=np.float64),
        c2=np.full(b, config.c2_init, dtype=np.float64),
        bucket_of=assign_buckets(vocab, b),
        dim=D,
    )


def sigmoid(x: float | np.ndarray):
    return 1.0 / (1.0 + np.exp(-x))


def knowledge_repr(t: int, relation: RelationMatrix, model: EmbeddingModel) -> np.ndarray:
    """Weighted sum of neighbor embeddings; zero vector for an empty row."""
    idx, wts = relation.row(t)
    if len(idx) == 0:
        return np.zeros(model.dim)
    return wts @ model.M[idx]


def combined_input(t: int, relation: RelationMatrix, model: EmbeddingModel) -> np.ndarray:
    b = model.bucket_of[t]
    return model.c1[b] * model.M[t] + model.c2[b] * knowledge_repr(t, relation, model)


def neg_objective(v: np.ndarray, out_word: int, noise: Sequence[int],
                  model: EmbeddingModel) -> float:
    """log-sigmoid score of the observed word minus the noise words."""
    total = float(np.log(sigmoid(model.M_out[out_word] @ v)))
    for i in noise:
        total += float(np.log(sigmoid(-(model.M_out[i] @ v))))
    return total


@dataclass
class StepGradients:
    """Ascent gradients of one NEG step, with the indices they apply to.

    ``out_words`` aligns with ``grad_out`` rows; the first entry is the
    observed output word, the rest are the noise draws (duplicates allowed
    and accumulated per occurrence at apply time).
    """

    t: int
    out_words: np.ndarray
    grad_input: np.ndarray
    grad_neighbors: np.ndarray
    grad_out: np.ndarray
    grad_c1: float
    grad_c2: float
    grad_s: np.ndarray


def step_gradients(t: int, out_word: int, noise: Sequence[int],
                   relation: RelationMatrix, model: EmbeddingModel) -> StepGradients:
    """All parameter gradients for one (center, output, noise) example,
    evaluated at the current parameters."""
    nbr_idx, nbr_wts = relation.row(t)
    bucket = model.bucket_of[t]
    a1 = model.c1[bucket]
    a2 = model.c2[bucket]
    v_r = knowledge_repr(t, relation, model)
    v = a1 * model.M[t] + a2 * v_r

    out_words = np.asarray([out_word, *noise], dtype=np.int64)
    u = model.M_out[out_words]
    g = -sigmoid(u @ v)
    g[0] += 1.0
    e = g @ u

    grad_out = np.outer(g, v)
    grad_neighbors = (a2 * nbr_wts)[:, None] * e[None, :]
    grad_s = a2 * (model.M[nbr_idx] @ e) if len(nbr_idx) else np.zeros(0)
    return StepGradients(
        t=t,
        out_words=out_words,
        grad_input=a1 * e,
        grad_neighbors=grad_neighbors,
        grad_out=grad_out,
        grad_c1=float(e @ model.M[t]),
        grad_c2=float(e @ v_r),
        grad_s=grad_s,
    )


def apply_step(model: EmbeddingModel, relation: RelationMatrix,
               grads: StepGradients, lr: float,
               freeze_relation: bool = False, freeze_coeffs: bool = False) -> None:
    """SGD ascent: parameter += lr * gradient for every unfrozen group.

    The relation's index structure is never touched; freeze flags skip the
    relation-weight and coefficient updates respectively.
    """
    t = grads.t
    model.M[t] += lr * grads.grad_input
    lo, hi = relation.indptr[t], relation.indptr[t + 1]
    nbr_idx = relation.neighbors[lo:hi]
    if len(nbr_idx):
        np.add.at(model.M, nbr_idx, lr * grads.grad_neighbors)
    np.add.at(model.M_out, grads.out_words, lr * grads.grad_out)
    bucket = model.bucket_of[t]
    if not freeze_coeffs:
        model.c1[bucket] += lr * grads.grad_c1
        model.c2[bucket] += lr * grads.grad_c2
    if not freeze_relation and len(nbr_idx):
        relation.weights[lo:hi] += lr * grads.grad_s


def predict_unknown(word: str, vocab: Vocabulary, M: np.ndarray,
                    resources: MorphResources, kind: MorphKind, top: int = 5,
                    index: SimilarityIndex | None = None) -> np.ndarray:
    """Synthesize an embedding for an out-of-vocabulary word.

    Takes the ``top`` most morphologically similar vocabulary words (ties
    by index), normalizes their scores to sum to one, and returns the
    weighted sum of their input embeddings. With the combination kind the
    candidates are vote-ranked across the four knowledge types and their
    mean scores are normalized.
    """
    if top < 1:
        raise ValueError("top must be >= 1")
    if word in vocab:
        raise ValueError(f"{word!r} is in the vocabulary; look it up directly")
    if index is None:
        index = SimilarityIndex(vocab, resources)
    if kind is MorphKind.COMBINATION:
        votes: dict[int, int] = {}
        sums: dict[int, float] = {}
        for single in MorphKind.single_kinds():
            idx, scr = index.word_topk(word, single, top)
            for j, s in zip(idx, scr):
                j = int(j)
                votes[j] = votes.get(j, 0) + 1
                sums[j] = sums.get(j, 0.0) + float(s)
        ranked = sorted(votes, key=lambda j: (-votes[j], j))[:top]
        cand = np.asarray(ranked, dtype=np.int64)
        scores = np.asarray([sums[j] / votes[j] for j in ranked])
    else:
        cand, scores = index.word_topk(word, kind, top)
    if len(cand) == 0:
        raise NoCandidatesError(
            f"{word!r} has zero {kind.value} similarity to every vocabulary word")
    weights = normalize_row(scores)
    return weights @ M[cand]


@dataclass
class BucketDiagnostics:
    bucket: int
    n_words: int
    c1: float
    c2: float
    ratio: float


@dataclass
class DiagnosticsReport:
    rows: list[BucketDiagnostics]
    overall_ratio: float

    RATIO_CLAMP = 5.0


def export_diagnostics(model: EmbeddingModel, vocab: Vocabulary) -> DiagnosticsReport:
    """Per-bucket |c1/c2| (clamped at 5) plus the word-count-weighted
    overall ratio sum(c1_i n_i) / sum(c2_i n_i)."""
    b = len(model.c1)
    n = np.bincount(model.bucket_of, minlength=b).astype(np.int64)
    rows = []
    clamp = DiagnosticsReport.RATIO_CLAMP
    for i in range(b):
        c1 = float(model.c1[i])
        c2 = float(model.c2[i])
        if abs(c2) < 1e-12:
            ratio = clamp
        else:
            ratio = min(abs(c1 / c2), clamp)
        rows.append(BucketDiagnostics(bucket=i, n_words=int(n[i]),
                                      c1=c1, c2=c2, ratio=ratio))
    denom = float(np.sum(model.c2 * n))
    numer = float(np.sum(model.c1 * n))
    overall = numer / denom if abs(denom) >= 1e-12 else float("inf")
    return DiagnosticsReport(rows=rows, overall_ratio=overall)
