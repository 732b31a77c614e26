"""Sparse top-k morphological neighbor construction.

Each vocabulary word gets at most k neighbors (never itself) weighted by
the raw similarity score; the index structure is frozen once built and
only the weights may change during training.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit, prange

from morphvec.corpus import Vocabulary
from morphvec.morphology import (
    MorphKind,
    MorphResources,
    default_resources,
    hyphenate,
    segment_morphemes,
)


class AllZeroRowError(ValueError):
    """Raised when a relation row with no positive weight is normalized."""


@dataclass
class RelationMatrix:
    """CSR-layout neighbor lists: row i holds the top-k morphological
    neighbors of word i, ordered by descending weight (ties by index)."""

    kind: MorphKind
    k: int
    indptr: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.indptr) - 1

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.neighbors[lo:hi], self.weights[lo:hi]

    def copy(self) -> "RelationMatrix":
        return RelationMatrix(self.kind, self.k, self.indptr.copy(),
                              self.neighbors.copy(), self.weights.copy())

    @property
    def nnz(self) -> int:
        return len(self.neighbors)


def normalize_row(weights: np.ndarray) -> np.ndarray:
    """Scale non-negative weights to sum to one."""
    w = np.asarray(weights, dtype=np.float64)
    total = w.sum()
    if len(w) == 0 or total <= 0.0:
        raise AllZeroRowError("cannot normalize a row without positive weight")
    return w / total


# ---------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _topk_insert(best_s, best_i, nbest, k, s, idx):
    # keep (score desc, index asc); order of candidate arrival is irrelevant
    if nbest == k:
        last = best_s[k - 1]
        if s < last or (s == last and idx > best_i[k - 1]):
            return nbest
        fill = k - 1
    else:
        fill = nbest
    p = 0
    while p < fill and (best_s[p] > s or (best_s[p] == s and best_i[p] < idx)):
        p += 1
    q = fill
    while q > p:
        best_s[q] = best_s[q - 1]
        best_i[q] = best_i[q - 1]
        q -= 1
    best_s[p] = s
    best_i[p] = idx
    return nbest + 1 if nbest < k else k


@njit(cache=True)
def _edit_sim(q_enc, qi, li, enc, j, lj, d0, d1):
    for c in range(lj + 1):
        d0[c] = c
    for a in range(1, li + 1):
        d1[0] = a
        ca = q_enc[qi, a - 1]
        for c in range(1, lj + 1):
            cost = 0 if ca == enc[j, c - 1] else 1
            m = d0[c - 1] + cost
            y = d0[c] + 1
            if y < m:
                m = y
            z = d1[c - 1] + 1
            if z < m:
                m = z
            d1[c] = m
        tmp = d0
        d0 = d1
        d1 = tmp
    hi = li if li >= lj else lj
    return 1.0 - d0[lj] / hi


@njit(cache=True)
def _lcs_sim(q_enc, qi, li, enc, j, lj, d0, d1):
    for c in range(lj + 1):
        d0[c] = 0
    g = 0
    for a in range(1, li + 1):
        d1[0] = 0
        ca = q_enc[qi, a - 1]
        for c in range(1, lj + 1):
            if ca == enc[j, c - 1]:
                r = d0[c - 1] + 1
                d1[c] = r
                if r > g:
                    g = r
            else:
                d1[c] = 0
        tmp = d0
        d0 = d1
        d1 = tmp
    hi = li if li >= lj else lj
    return g / hi


@njit(cache=True, parallel=True)
def _string_scan(q_enc, q_lens, enc, lens, order, sorted_lens, k, use_edit,
                 exclude_self, out_idx, out_scr, out_n):
    nq = q_enc.shape[0]
    V = enc.shape[0]
    width = max(q_enc.shape[1], enc.shape[1]) + 1
    for qi in prange(nq):
        best_s = np.zeros(k, np.float64)
        best_i = np.full(k, -1, np.int64)
        d0 = np.empty(width, np.int64)
        d1 = np.empty(width, np.int64)
        nbest = 0
        li = q_lens[qi]
        if li == 0:
            out_n[qi] = 0
            continue
        # walk candidates outward from the query's length: the score bound
        # 1 - |dl|/max shrinks monotonically on each side, so both sides can
        # stop once the bound falls below the current k-th score.
        start = np.searchsorted(sorted_lens, li)
        left = start - 1
        right = start
        while left >= 0 or right < V:
            # bounds use the same float expressions as the scores so that
            # a candidate achieving its bound exactly is never pruned
            bl = -1.0
            br = -1.0
            if left >= 0:
                ll = sorted_lens[left]
                bl = (1.0 - (li - ll) / li) if use_edit else (ll / li)
            if right < V:
                lr = sorted_lens[right]
                if lr > li:
                    br = (1.0 - (lr - li) / lr) if use_edit else (li / lr)
                else:
                    br = 1.0
            kth = best_s[k - 1] if nbest == k else -1.0
            if bl < kth and br < kth:
                break
            if bl >= br:
                j = order[left]
                bound = bl
                left -= 1
            else:
                j = order[right]
                bound = br
                right += 1
            if bound <= 0.0:
                continue
            if exclude_self and j == qi:
                continue
            if nbest == k and bound < best_s[k - 1]:
                continue
            lj = lens[j]
            if use_edit:
                s = _edit_sim(q_enc, qi, li, enc, j, lj, d0, d1)
            else:
                s = _lcs_sim(q_enc, qi, li, enc, j, lj, d0, d1)
            if s > 0.0:
                nbest = _topk_insert(best_s, best_i, nbest, k, s, j)
        out_n[qi] = nbest
        for p in range(nbest):
            out_idx[qi, p] = best_i[p]
            out_scr[qi, p] = best_s[p]


@njit(cache=True, parallel=True)
def _overlap_scan(q_indptr, q_segs, q_sizes, p_indptr, p_words, sizes, V, k,
                  exclude_self, out_idx, out_scr, out_n):
    nq = len(q_sizes)
    for qi in prange(nq):
        lo, hi = q_indptr[qi], q_indptr[qi + 1]
        cap = 0
        for x in range(lo, hi):
            seg = q_segs[x]
            cap += p_indptr[seg + 1] - p_indptr[seg]
        best_s = np.zeros(k, np.float64)
        best_i = np.full(k, -1, np.int64)
        nbest = 0
        if cap > 0:
            cnt = np.zeros(V, np.int32)
            touched = np.empty(cap, np.int64)
            nt = 0
            for x in range(lo, hi):
                seg = q_segs[x]
                for y in range(p_indptr[seg], p_indptr[seg + 1]):
                    w = p_words[y]
                    if exclude_self and w == qi:
                        continue
                    if cnt[w] == 0:
                        touched[nt] = w
                        nt += 1
                    cnt[w] += 1
            qs = q_sizes[qi]
            for t in range(nt):
                w = touched[t]
                ov = cnt[w]
                cnt[w] = 0
                mx = qs if qs >= sizes[w] else sizes[w]
                s = ov / mx
                if s > 0.0:
                    nbest = _topk_insert(best_s, best_i, nbest, k, s, w)
        out_n[qi] = nbest
        for p in range(nbest):
            out_idx[qi, p] = best_i[p]
            out_scr[qi, p] = best_s[p]


# ---------------------------------------------------------------------------
# similarity index: reusable encodings over one vocabulary


def _encode_word_list(words: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    data = [w.encode("utf-8") for w in words]
    maxlen = max((len(b) for b in data), default=1) or 1
    enc = np.zeros((len(words), maxlen), dtype=np.uint8)
    lens = np.empty(len(words), dtype=np.int64)
    for i, b in enumerate(data):
        lens[i] = len(b)
        enc[i, : len(b)] = np.frombuffer(b, dtype=np.uint8)
    return enc, lens


class SimilarityIndex:
    """Cached per-vocabulary structures for fast neighbor scans."""

    def __init__(self, vocab: Vocabulary, resources: MorphResources | None = None):
        self.vocab = vocab
        self.resources = resources or default_resources()
        self._enc: np.ndarray | None = None
        self._lens: np.ndarray | None = None
        self._order: np.ndarray | None = None
        self._sorted_lens: np.ndarray | None = None
        self._segments: dict[MorphKind, tuple] = {}

    # string side -----------------------------------------------------------

    def _string_side(self):
        if self._enc is None:
            self._enc, self._lens = _encode_word_list(self.vocab.words)
            self._order = np.argsort(self._lens, kind="stable").astype(np.int64)
            self._sorted_lens = self._lens[self._order]
        return self._enc, self._lens, self._order, self._sorted_lens

    # segment side ----------------------------------------------------------

    def _segment_word(self, word: str, kind: MorphKind) -> list[str]:
        if kind is MorphKind.MORPHEME:
            return segment_morphemes(word, self.resources.rules)
        return hyphenate(word, self.resources.patterns)

    def _segment_side(self, kind: MorphKind):
        cached = self._segments.get(kind)
        if cached is not None:
            return cached
        seg_ids: dict[str, int] = {}
        indptr = [0]
        flat: list[int] = []
        for w in self.vocab.words:
            segs = set(self._segment_word(w, kind))
            for s in segs:
                flat.append(seg_ids.setdefault(s, len(seg_ids)))
            indptr.append(len(flat))
        w_indptr = np.asarray(indptr, dtype=np.int64)
        w_segs = np.asarray(flat, dtype=np.int64)
        sizes = np.diff(w_indptr).astype(np.int64)
        # postings: segment id -> ascending word ids
        counts = np.zeros(len(seg_ids) + 1, dtype=np.int64)
        for s in flat:
            counts[s + 1] += 1
        p_indptr = np.cumsum(counts)
        p_words = np.empty(len(flat), dtype=np.int64)
        cursor = p_indptr[:-1].copy()
        for i in range(len(self.vocab.words)):
            for x in range(w_indptr[i], w_indptr[i + 1]):
                s = w_segs[x]
                p_words[cursor[s]] = i
                cursor[s] += 1
        side = (seg_ids, w_indptr, w_segs, sizes, p_indptr, p_words)
        self._segments[kind] = side
        return side

    # public scans ----------------------------------------------------------

    def vocab_topk(self, kind: MorphKind, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Top-k neighbors (exclude self) for every vocabulary word."""
        V = len(self.vocab)
        out_idx = np.full((V, k), -1, dtype=np.int64)
        out_scr = np.zeros((V, k), dtype=np.float64)
        out_n = np.zeros(V, dtype=np.int64)
        if kind in (MorphKind.EDIT, MorphKind.LCS):
            enc, lens, order, sorted_lens = self._string_side()
            _string_scan(enc, lens, enc, lens, order, sorted_lens, k,
                         kind is MorphKind.EDIT, True, out_idx, out_scr, out_n)
        else:
            _, w_indptr, w_segs, sizes, p_indptr, p_words = self._segment_side(kind)
            _overlap_scan(w_indptr, w_segs, sizes, p_indptr, p_words, sizes,
                          V, k, True, out_idx, out_scr, out_n)
        return out_idx, out_scr, out_n

    def word_topk(self, word: str, kind: MorphKind, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Top-k vocabulary neighbors of an arbitrary word (not excluded)."""
        out_idx = np.full((1, k), -1, dtype=np.int64)
        out_scr = np.zeros((1, k), dtype=np.float64)
        out_n = np.zeros(1, dtype=np.int64)
        if kind in (MorphKind.EDIT, MorphKind.LCS):
            enc, lens, order, sorted_lens = self._string_side()
            q_enc, q_lens = _encode_word_list([word])
            _string_scan(q_enc, q_lens, enc, lens, order, sorted_lens, k,
                         kind is MorphKind.EDIT, False, out_idx, out_scr, out_n)
        else:
            seg_ids, _, _, _, p_indptr, p_words = self._segment_side(kind)
            sizes = self._segment_side(kind)[3]
            segs = set(self._segment_word(word, kind))
            known = sorted(seg_ids[s] for s in segs if s in seg_ids)
            q_indptr = np.asarray([0, len(known)], dtype=np.int64)
            q_segs = np.asarray(known, dtype=np.int64)
            q_sizes = np.asarray([len(segs)], dtype=np.int64)
            _overlap_scan(q_indptr, q_segs, q_sizes, p_indptr, p_words, sizes,
                          len(self.vocab), k, False, out_idx, out_scr, out_n)
        n = int(out_n[0])
        return out_idx[0, :n], out_scr[0, :n]


# ---------------------------------------------------------------------------
# construction


def build_relation(
    vocab: Vocabulary,
    kind: MorphKind,
    k: int = 5,
    resources: MorphResources | None = None,
    index: SimilarityIndex | None = None,
) -> RelationMatrix:
    """Top-k neighbor rows for one single knowledge type.

    Words whose score to every other word is zero get an empty row.
    """
    if kind is MorphKind.COMBINATION:
        raise ValueError("build per-kind matrices and use combine_relations")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if index is None:
        index = SimilarityIndex(vocab, resources)
    out_idx, out_scr, out_n = index.vocab_topk(kind, k)
    V = len(vocab)
    indptr = np.zeros(V + 1, dtype=np.int64)
    np.cumsum(out_n, out=indptr[1:])
    neighbors = np.empty(int(indptr[-1]), dtype=np.int32)
    weights = np.empty(int(indptr[-1]), dtype=np.float64)
    for i in range(V):
        n = int(out_n[i])
        neighbors[indptr[i]:indptr[i] + n] = out_idx[i, :n]
        weights[indptr[i]:indptr[i] + n] = out_scr[i, :n]
    return RelationMatrix(kind=kind, k=k, indptr=indptr,
                          neighbors=neighbors, weights=weights)


def combine_relations(per_kind: Sequence[RelationMatrix], k: int) -> RelationMatrix:
    """Vote-combine neighbor lists from the four knowledge types.

    Candidates are ranked by how many lists contain them (ties by
    ascending index); a kept neighbor's weight is the mean of its scores
    over the lists that contain it.
    """
    if not per_kind:
        raise ValueError("need at least one input relation")
    V = len(per_kind[0])
    if any(len(m) != V for m in per_kind):
        raise ValueError("input relations cover different vocabularies")
    if any(m.k != per_kind[0].k for m in per_kind):
        raise ValueError("input relations were built with different k")
    indptr = np.zeros(V + 1, dtype=np.int64)
    all_nbrs: list[np.ndarray] = []
    all_wts: list[np.ndarray] = []
    for i in range(V):
        votes: dict[int, int] = {}
        sums: dict[int, float] = {}
        for mat in per_kind:
            idx, wts = mat.row(i)
            for j, w in zip(idx, wts):
                j = int(j)
                votes[j] = votes.get(j, 0) + 1
                sums[j] = sums.get(j, 0.0) + float(w)
        ranked = sorted(votes, key=lambda j: (-votes[j], j))[:k]
        nbrs = np.asarray(ranked, dtype=np.int32)
        wts = np.asarray([sums[j] / votes[j] for j in ranked], dtype=np.float64)
        all_nbrs.append(nbrs)
        all_wts.append(wts)
        indptr[i + 1] = indptr[i] + len(nbrs)
    neighbors = (np.concatenate(all_nbrs) if all_nbrs
                 else np.empty(0, dtype=np.int32)).astype(np.int32)
    weights = (np.concatenate(all_wts) if all_wts
               else np.empty(0, dtype=np.float64)).astype(np.float64)
    return RelationMatrix(kind=MorphKind.COMBINATION, k=k, indptr=indptr,
                          neighbors=neighbors, weights=weights)


# ---------------------------------------------------------------------------
# file format: word<TAB>neighbor:weight neighbor:weight ...


def save_relation(mat: RelationMatrix, vocab: Vocabulary, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i, word in enumerate(vocab.words):
            idx, wts = mat.row(i)
            pairs = " ".join(f"{vocab.words[j]}:{w:.6f}" for j, w in zip(idx, wts))
            fh.write(f"{word}\t{pairs}\n")


def load_relation(path: str | Path, vocab: Vocabulary, kind: MorphKind,
                  k: int | None = None) -> RelationMatrix:
    rows_idx: list[list[int]] = []
    rows_wts: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.rstrip("\n")
            if not line:
                continue
            word, _, rest = line.partition("\t")
            if vocab.index.get(word) != len(rows_idx):
                raise ValueError(
                    f"{path}:{lineno + 1}: word {word!r} out of vocabulary order")
            idx: list[int] = []
            wts: list[float] = []
            if rest:
                for pair in rest.split(" "):
                    name, _, wstr = pair.rpartition(":")
                    idx.append(vocab.index[name])
                    wts.append(float(wstr))
            rows_idx.append(idx)
            rows_wts.append(wts)
    if len(rows_idx) != len(vocab):
        raise ValueError(f"{path}: {len(rows_idx)} rows for a vocabulary of {len(vocab)}")
    if k is None:
        k = max((len(r) for r in rows_idx), default=1) or 1
    indptr = np.zeros(len(vocab) + 1, dtype=np.int64)
    for i, r in enumerate(rows_idx):
        indptr[i + 1] = indptr[i] + len(r)
    neighbors = np.asarray([j for r in rows_idx for j in r], dtype=np.int32)
    weights = np.asarray([w for r in rows_wts for w in r], dtype=np.float64)
    return RelationMatrix(kind=kind, k=k, indptr=indptr,
                          neighbors=neighbors, weights=weights)
