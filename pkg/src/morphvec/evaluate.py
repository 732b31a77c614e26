"""Evaluation protocols: analogical reasoning and word-similarity correlation.

Analogies are answered by the normalized-offset argmax over the whole
vocabulary, excluding the b and c question words; word similarity compares
cosine scores against human judgments with Spearman's rho.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from morphvec.corpus import Vocabulary
from morphvec.model import predict_unknown
from morphvec.morphology import MorphKind, MorphResources
from morphvec.relation import SimilarityIndex

SEMANTIC_CATEGORY_PREFIXES = ("capital-", "city-", "currency", "family")

SEMANTIC = "semantic"
SYNTACTIC = "syntactic"


class UndefinedCorrelationError(ValueError):
    """Raised when either rank vector has zero variance."""


class OOVMode(Enum):
    KNOWN_ONLY = "known-only"
    ALL_WORDS = "all-words"


@dataclass
class AnalogyQuestion:
    a: str
    b: str
    c: str
    d: str
    category: str  # SEMANTIC or SYNTACTIC

    def __post_init__(self):
        if not all((self.a, self.b, self.c, self.d)):
            raise ValueError("analogy words must be non-empty")


@dataclass
class SimilarityPair:
    w1: str
    w2: str
    human_score: float


@dataclass
class EvalResult:
    """Results of either task; unused fields stay None."""

    semantic_acc: float | None = None
    syntactic_acc: float | None = None
    total_acc: float | None = None
    spearman_rho: float | None = None
    n_answered: int = 0
    n_skipped: int = 0
    n_oov_defaulted: int = 0


# ---------------------------------------------------------------------------
# dataset files


def load_analogies(path: str | Path,
                   semantic_prefixes: Sequence[str] = SEMANTIC_CATEGORY_PREFIXES,
                   ) -> list[AnalogyQuestion]:
    """Google-analogy text format: ``: category`` headers, 4-word lines."""
    questions: list[AnalogyQuestion] = []
    category = SYNTACTIC
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            parts = line.split()
            if not parts:
                continue
            if parts[0] == ":":
                name = parts[1].lower() if len(parts) > 1 else ""
                category = (SEMANTIC if any(name.startswith(p)
                                            for p in semantic_prefixes)
                            else SYNTACTIC)
                continue
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno + 1}: expected 4 words, got {len(parts)}")
            a, b, c, d = (p.lower() for p in parts)
            questions.append(AnalogyQuestion(a, b, c, d, category))
    return questions


def load_word_pairs(path: str | Path) -> list[SimilarityPair]:
    """Tab-separated ``word1 word2 score`` rows; a non-numeric first row is
    treated as a header."""
    pairs: list[SimilarityPair] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno + 1}: expected 3 tab-separated fields")
            try:
                score = float(parts[2])
            except ValueError:
                if lineno == 0:
                    continue
                raise
            pairs.append(SimilarityPair(parts[0].lower(), parts[1].lower(), score))
    return pairs


# ---------------------------------------------------------------------------
# analogy task


def normalize_rows(M: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(M, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return M / safe


def answer_analogy(q: AnalogyQuestion, words: list[str], unit_M: np.ndarray,
                   index: dict[str, int] | None = None) -> str | None:
    """Predicted word for one question over unit-normalized embeddings,
    or None when a, b, or c is out of vocabulary."""
    if index is None:
        index = {w: i for i, w in enumerate(words)}
    ia = index.get(q.a)
    ib = index.get(q.b)
    ic = index.get(q.c)
    if ia is None or ib is None or ic is None:
        return None
    target = unit_M[ib] - unit_M[ia] + unit_M[ic]
    scores = unit_M @ target
    scores[ib] = -np.inf
    scores[ic] = -np.inf
    return words[int(np.argmax(scores))]


def eval_analogies(questions: Sequence[AnalogyQuestion], words: list[str],
                   M: np.ndarray, batch: int = 512) -> EvalResult:
    """Exact-match accuracy per category over the answerable questions."""
    index = {w: i for i, w in enumerate(words)}
    unit = normalize_rows(np.asarray(M, dtype=np.float64))
    counts = {SEMANTIC: [0, 0], SYNTACTIC: [0, 0]}  # [correct, answered]
    skipped = 0

    answerable = []
    for q in questions:
        if q.a in index and q.b in index and q.c in index:
            answerable.append(q)
        else:
            skipped += 1
    for start in range(0, len(answerable), batch):
        chunk = answerable[start:start + batch]
        ia = np.asarray([index[q.a] for q in chunk])
        ib = np.asarray([index[q.b] for q in chunk])
        ic = np.asarray([index[q.c] for q in chunk])
        targets = unit[ib] - unit[ia] + unit[ic]
        scores = targets @ unit.T
        rows = np.arange(len(chunk))
        scores[rows, ib] = -np.inf
        scores[rows, ic] = -np.inf
        best = np.argmax(scores, axis=1)
        for q, pred in zip(chunk, best):
            counts[q.category][1] += 1
            if words[int(pred)] == q.d:
                counts[q.category][0] += 1

    def ratio(c):
        return c[0] / c[1] if c[1] else 0.0

    n_answered = counts[SEMANTIC][1] + counts[SYNTACTIC][1]
    n_correct = counts[SEMANTIC][0] + counts[SYNTACTIC][0]
    return EvalResult(
        semantic_acc=ratio(counts[SEMANTIC]),
        syntactic_acc=ratio(counts[SYNTACTIC]),
        total_acc=(n_correct / n_answered if n_answered else 0.0),
        n_answered=n_answered,
        n_skipped=skipped,
    )


# ---------------------------------------------------------------------------
# word similarity task


def _average_ranks(xs: np.ndarray) -> np.ndarray:
    """Fractional ranks with ties receiving the mean of their positions."""
    order = np.argsort(xs, kind="stable")
    ranks = np.empty(len(xs))
    i = 0
    while i < len(xs):
        j = i
        while j + 1 < len(xs) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average-tie fractional ranks."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
        raise ValueError("need two equal-length sequences of at least 2 values")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = np.sqrt((dx @ dx) * (dy @ dy))
    if denom == 0.0:
        raise UndefinedCorrelationError("zero rank variance on one side")
    return float((dx @ dy) / denom)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


def eval_wordsim(pairs: Sequence[SimilarityPair], words: list[str], M: np.ndarray,
                 mode: OOVMode = OOVMode.KNOWN_ONLY,
                 oov_kind: MorphKind = MorphKind.COMBINATION,
                 resources: MorphResources | None = None,
                 oov_top: int = 5,
                 sim_index: SimilarityIndex | None = None) -> EvalResult:
    """Spearman correlation of embedding cosines against human scores.

    KNOWN_ONLY replaces every OOV embedding with a shared default (zero)
    vector; ALL_WORDS synthesizes OOV embeddings from morphological
    neighbors. OOV words with no scoring candidate fall back to the
    default vector in both modes (counted in n_oov_defaulted).
    """
    index = {w: i for i, w in enumerate(words)}
    M = np.asarray(M, dtype=np.float64)
    default = np.zeros(M.shape[1])

    synth_cache: dict[str, np.ndarray] = {}
    vocab = None
    if mode is OOVMode.ALL_WORDS:
        counts = np.arange(len(words), 0, -1, dtype=np.int64)
        vocab = Vocabulary(words=list(words), counts=counts, index=index,
                           total_tokens=int(counts.sum()))
        if sim_index is None:
            sim_index = SimilarityIndex(vocab, resources)

    defaulted = 0

    def embed(word: str) -> np.ndarray:
        nonlocal defaulted
        i = index.get(word)
        if i is not None:
            return M[i]
        if mode is OOVMode.KNOWN_ONLY:
            defaulted += 1
            return default
        if word not in synth_cache:
            from morphvec.model import NoCandidatesError

            try:
                synth_cache[word] = predict_unknown(
                    word, vocab, M, sim_index.resources, oov_kind,
                    top=oov_top, index=sim_index)
            except NoCandidatesError:
                synth_cache[word] = default
        vec = synth_cache[word]
        if not vec.any():
            defaulted += 1
        return vec

    model_scores = []
    human_scores = []
    for p in pairs:
        model_scores.append(cosine(embed(p.w1), embed(p.w2)))
        human_scores.append(p.human_score)
    rho = spearman_rho(model_scores, human_scores)
    return EvalResult(spearman_rho=rho, n_answered=len(pairs),
                      n_oov_defaulted=defaulted)
