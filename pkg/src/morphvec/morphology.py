"""Morphological word-similarity metrics and their supporting string algorithms.

Four pairwise scores are provided, each in [0, 1] and symmetric:

* edit similarity       1 - d(w1,w2)/max(len)          (Levenshtein d)
* substring similarity  g(w1,w2)/max(len)              (longest common substring g)
* morpheme similarity   |F1 n F2| / max(|F1|,|F2|)     (affix-stripping segments F)
* syllable similarity   |G1 n G2| / max(|G1|,|G2|)     (Liang hyphenation pieces G)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from importlib import resources as importlib_resources
from pathlib import Path


class MorphKind(Enum):
    """One knowledge type, or the voted combination of all four."""

    EDIT = "edit"
    LCS = "lcs"
    MORPHEME = "morpheme"
    SYLLABLE = "syllable"
    COMBINATION = "combination"

    @classmethod
    def single_kinds(cls) -> tuple["MorphKind", ...]:
        return (cls.EDIT, cls.LCS, cls.MORPHEME, cls.SYLLABLE)


# ---------------------------------------------------------------------------
# letter-level metrics


def edit_distance(w1: str, w2: str) -> int:
    """Levenshtein distance with unit-cost insert/delete/substitute."""
    if len(w1) < len(w2):
        w1, w2 = w2, w1
    prev = list(range(len(w2) + 1))
    for i, ch1 in enumerate(w1, start=1):
        cur = [i]
        for j, ch2 in enumerate(w2, start=1):
            cost = 0 if ch1 == ch2 else 1
            cur.append(min(prev[j - 1] + cost, prev[j] + 1, cur[j - 1] + 1))
        prev = cur
    return prev[-1]


def sim_edit(w1: str, w2: str) -> float:
    return 1.0 - edit_distance(w1, w2) / max(len(w1), len(w2))


def lcs_length(w1: str, w2: str) -> int:
    """Length of the longest contiguous substring shared by both words."""
    if len(w1) < len(w2):
        w1, w2 = w2, w1
    best = 0
    prev = [0] * (len(w2) + 1)
    for ch1 in w1:
        cur = [0]
        for j, ch2 in enumerate(w2, start=1):
            run = prev[j - 1] + 1 if ch1 == ch2 else 0
            cur.append(run)
            if run > best:
                best = run
        prev = cur
    return best


def sim_lcs(w1: str, w2: str) -> float:
    return lcs_length(w1, w2) / max(len(w1), len(w2))


# ---------------------------------------------------------------------------
# morpheme segmentation


@dataclass(frozen=True)
class SegmentationRules:
    """Affix inventory for the greedy stripping segmenter."""

    prefixes: frozenset[str]
    suffixes: frozenset[str]
    min_stem_len: int = 3

    def __post_init__(self):
        if self.min_stem_len < 2:
            raise ValueError("min_stem_len must be >= 2")
        if any(not p for p in self.prefixes) or any(not s for s in self.suffixes):
            raise ValueError("affixes must be non-empty strings")


def segment_morphemes(word: str, rules: SegmentationRules) -> list[str]:
    """Split a word into prefixes + stem + suffixes by greedy longest-match.

    Prefixes are stripped repeatedly from the front, then suffixes from the
    back, each strip allowed only while it leaves a stem of at least
    ``min_stem_len`` letters. Returns the segments in word order,
    deduplicated (set semantics with stable order).
    """
    stem = word
    prefixes: list[str] = []
    suffixes: list[str] = []
    while True:
        best = None
        for p in rules.prefixes:
            if stem.startswith(p) and len(stem) - len(p) >= rules.min_stem_len:
                if best is None or len(p) > len(best):
                    best = p
        if best is None:
            break
        prefixes.append(best)
        stem = stem[len(best):]
    while True:
        best = None
        for s in rules.suffixes:
            if stem.endswith(s) and len(stem) - len(s) >= rules.min_stem_len:
                if best is None or len(s) > len(best):
                    best = s
        if best is None:
            break
        suffixes.append(best)
        stem = stem[: len(stem) - len(best)]
    ordered = prefixes + [stem] + list(reversed(suffixes))
    seen: dict[str, None] = {}
    for seg in ordered:
        seen.setdefault(seg, None)
    return list(seen)


def sim_morpheme(w1: str, w2: str, rules: SegmentationRules) -> float:
    f1 = set(segment_morphemes(w1, rules))
    f2 = set(segment_morphemes(w2, rules))
    return len(f1 & f2) / max(len(f1), len(f2))


def load_affixes(path: str | Path, min_stem_len: int = 3) -> SegmentationRules:
    """Read an affix list file with ``[prefixes]`` / ``[suffixes]`` sections."""
    prefixes: set[str] = set()
    suffixes: set[str] = set()
    section = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.lower() == "[prefixes]":
                section = prefixes
            elif line.lower() == "[suffixes]":
                section = suffixes
            elif section is None:
                raise ValueError(f"{path}: affix {line!r} appears before any section header")
            else:
                section.add(line.lower())
    return SegmentationRules(prefixes=frozenset(prefixes),
                             suffixes=frozenset(suffixes),
                             min_stem_len=min_stem_len)


# ---------------------------------------------------------------------------
# hyphenation (Liang's pattern algorithm)


@dataclass(frozen=True)
class HyphenationPatterns:
    """Liang patterns: letter keys with interleaved digit weights, plus
    fixed-split exceptions that override the patterns entirely."""

    patterns: dict[str, tuple[int, ...]]
    exceptions: dict[str, tuple[str, ...]] = field(default_factory=dict)
    max_key_len: int = 0

    def __post_init__(self):
        for key, weights in self.patterns.items():
            if len(weights) != len(key) + 1:
                raise ValueError(f"pattern {key!r}: weight vector must have length {len(key) + 1}")
        longest = max((len(k) for k in self.patterns), default=0)
        object.__setattr__(self, "max_key_len", longest)


_PATTERN_TOKEN_RE = re.compile(r"^[a-z.0-9]+$")


def _compile_pattern(token: str) -> tuple[str, tuple[int, ...]]:
    key_chars: list[str] = []
    weights = [0]
    for ch in token:
        if ch.isdigit():
            weights[-1] = int(ch)
        else:
            key_chars.append(ch)
            weights.append(0)
    return "".join(key_chars), tuple(weights)


def load_patterns(path: str | Path) -> HyphenationPatterns:
    """Parse a TeX-format pattern file (accepts hyphen.tex verbatim).

    ``%`` starts a comment; ``\\patterns{...}`` blocks and bare lines hold
    patterns, ``\\hyphenation{...}`` blocks hold exception words with
    explicit hyphens. Unrecognized control sequences are skipped.
    """
    patterns: dict[str, tuple[int, ...]] = {}
    exceptions: dict[str, tuple[str, ...]] = {}
    mode = "patterns"

    def add_entry(body: str) -> None:
        if mode == "exceptions":
            pieces = tuple(p for p in body.split("-") if p)
            if pieces:
                exceptions["".join(pieces)] = pieces
        else:
            if not _PATTERN_TOKEN_RE.match(body):
                raise ValueError(f"{path}: malformed pattern token {body!r}")
            key, weights = _compile_pattern(body)
            prior = patterns.get(key)
            if prior is not None:
                weights = tuple(max(a, b) for a, b in zip(prior, weights))
            patterns[key] = weights

    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("%", 1)[0]
            for token in line.split():
                while token:
                    if token.startswith("\\patterns{"):
                        mode = "patterns"
                        token = token[len("\\patterns{"):]
                    elif token.startswith("\\hyphenation{"):
                        mode = "exceptions"
                        token = token[len("\\hyphenation{"):]
                    elif token.startswith("\\"):
                        token = ""
                    else:
                        body, brace, rest = token.partition("}")
                        if body:
                            add_entry(body)
                        if brace:
                            mode = "patterns"
                        token = rest
    return HyphenationPatterns(patterns=patterns, exceptions=exceptions)


def hyphenate(word: str, patterns: HyphenationPatterns) -> list[str]:
    """Split a word into syllable pieces with Liang's algorithm.

    The word is wrapped in boundary dots, all matching patterns overlay
    their digits taking per-position maxima, and cuts fall where the final
    digit is odd -- never inside the first or last two letters. Exceptions
    override. Pieces concatenate back to the input.
    """
    w = word.lower()
    exc = patterns.exceptions.get(w)
    if exc is not None:
        return list(exc)
    n = len(w)
    if n < 4:
        return [word]
    work = "." + w + "."
    m = len(work)
    points = [0] * (m + 1)
    table = patterns.patterns
    max_len = min(patterns.max_key_len, m) or m
    for i in range(m):
        for length in range(1, min(max_len, m - i) + 1):
            weights = table.get(work[i:i + length])
            if weights is not None:
                for j, d in enumerate(weights):
                    if d > points[i + j]:
                        points[i + j] = d
    # A cut after letter c (0-based) sits at boundary index c+2 of `work`;
    # both resulting pieces must keep at least two letters.
    pieces: list[str] = []
    start = 0
    for c in range(1, n - 2):
        if points[c + 2] % 2 == 1:
            pieces.append(word[start:c + 1])
            start = c + 1
    pieces.append(word[start:])
    return pieces


def sim_syllable(w1: str, w2: str, patterns: HyphenationPatterns) -> float:
    g1 = set(hyphenate(w1, patterns))
    g2 = set(hyphenate(w2, patterns))
    return len(g1 & g2) / max(len(g1), len(g2))


# ---------------------------------------------------------------------------
# bundled resources and the kind dispatcher


@dataclass(frozen=True)
class MorphResources:
    """Everything needed to score any knowledge type."""

    rules: SegmentationRules
    patterns: HyphenationPatterns


def _data_path(name: str) -> Path:
    return Path(importlib_resources.files("morphvec").joinpath("data", name))


@lru_cache(maxsize=1)
def default_rules() -> SegmentationRules:
    return load_affixes(_data_path("affixes.txt"))


@lru_cache(maxsize=1)
def default_patterns() -> HyphenationPatterns:
    return load_patterns(_data_path("hyphen_en.tex"))


def default_resources() -> MorphResources:
    return MorphResources(rules=default_rules(), patterns=default_patterns())


def load_resources(affixes_path: str | Path | None = None,
                   patterns_path: str | Path | None = None,
                   min_stem_len: int = 3) -> MorphResources:
    rules = (load_affixes(affixes_path, min_stem_len)
             if affixes_path else default_rules())
    patterns = load_patterns(patterns_path) if patterns_path else default_patterns()
    return MorphResources(rules=rules, patterns=patterns)


def similarity(kind: MorphKind, w1: str, w2: str, resources: MorphResources) -> float:
    """Pairwise score for one single knowledge type."""
    if kind is MorphKind.EDIT:
        return sim_edit(w1, w2)
    if kind is MorphKind.LCS:
        return sim_lcs(w1, w2)
    if kind is MorphKind.MORPHEME:
        return sim_morpheme(w1, w2, resources.rules)
    if kind is MorphKind.SYLLABLE:
        return sim_syllable(w1, w2, resources.patterns)
    raise ValueError("the combination kind is not a pairwise score; "
                     "combine per-kind neighbor lists instead")
