"""Corpus cleaning, vocabulary construction, and the negative-sampling noise table."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

NOISE_POWER = 0.75

_DIGIT_WORDS = {
    "0": " zero ", "1": " one ", "2": " two ", "3": " three ", "4": " four ",
    "5": " five ", "6": " six ", "7": " seven ", "8": " eight ", "9": " nine ",
}
_DIGIT_RE = re.compile(r"[0-9]")
_NON_ALPHA_RE = re.compile(r"[^a-z]+")


class EmptyVocabularyError(ValueError):
    """Raised when no word survives the frequency threshold."""


def preprocess_text(raw: bytes | str) -> str:
    """Clean raw text down to lowercase a-z words separated by single spaces.

    Each digit becomes its English word as a separate token; every other
    non-letter character acts as a separator. Invalid UTF-8 byte sequences
    are dropped. Idempotent.
    """
    if isinstance(raw, bytes):
        raw = raw.decode("utf-8", errors="ignore")
    text = raw.lower()
    text = _DIGIT_RE.sub(lambda m: _DIGIT_WORDS[m.group()], text)
    return _NON_ALPHA_RE.sub(" ", text).strip()


@dataclass
class Vocabulary:
    """Frequency-ranked vocabulary. Immutable after construction.

    Words are ordered by descending count, ties broken by first occurrence
    in the corpus; ``index`` maps each word to its position.
    """

    words: list[str]
    counts: np.ndarray
    index: dict[str, int] = field(repr=False)
    total_tokens: int = 0

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for word, count in zip(self.words, self.counts):
                fh.write(f"{word}\t{int(count)}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        words: list[str] = []
        counts: list[int] = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                word, count = line.split("\t")
                words.append(word)
                counts.append(int(count))
        arr = np.asarray(counts, dtype=np.int64)
        if len(words) == 0:
            raise EmptyVocabularyError(f"vocabulary file {path} is empty")
        return cls(words=words, counts=arr,
                   index={w: i for i, w in enumerate(words)},
                   total_tokens=int(arr.sum()))


def build_vocab(tokens: str | Iterable[str], min_count: int = 5) -> Vocabulary:
    """Count tokens and keep every word occurring at least ``min_count`` times.

    ``tokens`` is either cleaned text (split on spaces) or an iterable of
    tokens. Raises EmptyVocabularyError when nothing survives.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counter: Counter[str] = Counter()
    if isinstance(tokens, str):
        counter.update(tokens.split())
    else:
        counter.update(tokens)
    # Counter iteration preserves first-occurrence order; the stable sort
    # keeps that order among equal counts.
    surviving = [(w, c) for w, c in counter.items() if c >= min_count]
    if not surviving:
        raise EmptyVocabularyError(
            f"no word occurs at least {min_count} times")
    surviving.sort(key=lambda wc: -wc[1])
    words = [w for w, _ in surviving]
    counts = np.asarray([c for _, c in surviving], dtype=np.int64)
    return Vocabulary(words=words, counts=counts,
                      index={w: i for i, w in enumerate(words)},
                      total_tokens=int(counts.sum()))


@dataclass
class NoiseTable:
    """Cumulative distribution of the smoothed unigram noise distribution.

    Entry i is the total probability mass of words 0..i under
    count^0.75 / Z; the final entry is 1 (within float error).
    """

    cumulative: np.ndarray

    def mass(self, i: int) -> float:
        prev = self.cumulative[i - 1] if i > 0 else 0.0
        return float(self.cumulative[i] - prev)


def build_noise_table(vocab: Vocabulary) -> NoiseTable:
    if len(vocab) == 0:
        raise EmptyVocabularyError("cannot build a noise table for an empty vocabulary")
    mass = vocab.counts.astype(np.float64) ** NOISE_POWER
    cumulative = np.cumsum(mass / mass.sum())
    return NoiseTable(cumulative=cumulative)


def sample_noise(table: NoiseTable, rng: np.random.Generator) -> int:
    """Draw one word index distributed per the noise table."""
    u = rng.random()
    idx = int(np.searchsorted(table.cumulative, u, side="right"))
    return min(idx, len(table.cumulative) - 1)


@dataclass
class TokenStream:
    """Corpus as vocabulary indices, in order, with OOV tokens dropped."""

    tokens: np.ndarray
    vocab: Vocabulary

    def __len__(self) -> int:
        return len(self.tokens)


def encode_tokens(
    text: str | Iterable[str],
    vocab: Vocabulary,
    subsample: float = 0.0,
    rng: np.random.Generator | None = None,
) -> TokenStream:
    """Map cleaned text to a TokenStream over ``vocab``.

    ``subsample`` > 0 enables word2vec-style frequent-word dropping with
    threshold t=subsample (off by default; the training recipe does not
    use it).
    """
    it = text.split() if isinstance(text, str) else text
    index = vocab.index
    ids = np.fromiter((index[w] for w in it if w in index), dtype=np.int32)
    if subsample > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        freq = vocab.counts[ids].astype(np.float64) / vocab.total_tokens
        keep = (np.sqrt(freq / subsample) + 1.0) * (subsample / freq)
        ids = ids[rng.random(len(ids)) < keep]
    return TokenStream(tokens=ids, vocab=vocab)
