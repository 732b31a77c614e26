import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morphvec.corpus import (
    EmptyVocabularyError,
    Vocabulary,
    build_noise_table,
    build_vocab,
    encode_tokens,
    preprocess_text,
    sample_noise,
)


class TestPreprocess:
    def test_digit_replacement(self):
        assert preprocess_text("3 was replaced") == "three was replaced"

    def test_empty(self):
        assert preprocess_text("") == ""

    def test_mixed_separators(self):
        assert preprocess_text("A.B-C 42") == "a b c four two"

    def test_bytes_with_invalid_utf8(self):
        raw = b"caf\xc3\xa9 \xff\xfe ok 7"
        out = preprocess_text(raw)
        assert out == "caf ok seven"

    def test_all_digits(self):
        assert preprocess_text("0123456789") == (
            "zero one two three four five six seven eight nine")

    @given(st.text(max_size=200))
    @settings(max_examples=200)
    def test_idempotent(self, raw):
        once = preprocess_text(raw)
        assert preprocess_text(once) == once

    @given(st.text(max_size=200))
    def test_output_alphabet(self, raw):
        out = preprocess_text(raw)
        assert set(out) <= set("abcdefghijklmnopqrstuvwxyz ")
        assert "  " not in out
        assert out == out.strip()


class TestBuildVocab:
    def test_direct_count(self):
        v = build_vocab("a a b", min_count=1)
        assert len(v) == 2
        assert v.words == ["a", "b"]
        assert list(v.counts) == [2, 1]
        assert v.total_tokens == 3

    def test_threshold(self):
        v = build_vocab("a a b", min_count=2)
        assert len(v) == 1
        assert v.words == ["a"]

    def test_empty_raises(self):
        with pytest.raises(EmptyVocabularyError):
            build_vocab("a b c", min_count=2)

    def test_min_count_validation(self):
        with pytest.raises(ValueError):
            build_vocab("a", min_count=0)

    def test_tie_break_first_occurrence(self):
        v = build_vocab("zed ant zed ant mid", min_count=1)
        assert v.words == ["zed", "ant", "mid"]

    def test_zipf_sample_matches_bruteforce(self):
        # independent oracle: plain dict counting + filter + sort
        rng = np.random.default_rng(42)
        words = [f"w{i}" for i in range(50)]
        probs = 1.0 / np.arange(1, 51)
        probs /= probs.sum()
        tokens = [words[i] for i in rng.choice(50, size=1000, p=probs)]

        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        first_seen = {t: i for i, t in reversed(list(enumerate(tokens)))}
        expected = sorted(
            ((w, c) for w, c in counts.items() if c >= 5),
            key=lambda wc: (-wc[1], first_seen[wc[0]]),
        )

        v = build_vocab(" ".join(tokens), min_count=5)
        assert [(w, int(c)) for w, c in zip(v.words, v.counts)] == expected

    @given(st.lists(st.sampled_from("abcdefg"), min_size=1, max_size=300),
           st.integers(1, 4))
    @settings(max_examples=100)
    def test_recount_reproduces_counts(self, tokens, min_count):
        try:
            v = build_vocab(tokens, min_count=min_count)
        except EmptyVocabularyError:
            return
        kept = [t for t in tokens if t in v]
        for w, c in zip(v.words, v.counts):
            assert kept.count(w) == c
        assert v.total_tokens == len(kept)
        assert all(c >= min_count for c in v.counts)
        counts = list(v.counts)
        assert counts == sorted(counts, reverse=True)
        assert [v.index[w] for w in v.words] == list(range(len(v)))


def _vocab_from_counts(counts):
    words = [f"w{i}" for i in range(len(counts))]
    arr = np.asarray(counts, dtype=np.int64)
    return Vocabulary(words=words, counts=arr,
                      index={w: i for i, w in enumerate(words)},
                      total_tokens=int(arr.sum()))


class TestNoiseTable:
    def test_single_word(self):
        t = build_noise_table(_vocab_from_counts([7]))
        assert t.cumulative.shape == (1,)
        assert t.cumulative[0] == pytest.approx(1.0, abs=1e-12)

    def test_hand_masses(self):
        # 16^(3/4) = 8, 1^(3/4) = 1 -> masses 8/9 and 1/9
        t = build_noise_table(_vocab_from_counts([16, 1]))
        assert t.mass(0) == pytest.approx(8 / 9, abs=1e-12)
        assert t.mass(1) == pytest.approx(1 / 9, abs=1e-12)

    def test_uniform(self):
        t = build_noise_table(_vocab_from_counts([3, 3, 3, 3]))
        for i in range(4):
            assert t.mass(i) == pytest.approx(0.25, abs=1e-12)

    @given(st.lists(st.integers(1, 10**6), min_size=1, max_size=60))
    def test_invariants(self, counts):
        counts = sorted(counts, reverse=True)
        t = build_noise_table(_vocab_from_counts(counts))
        assert abs(t.cumulative[-1] - 1.0) < 1e-9
        assert np.all(np.diff(t.cumulative) >= 0)
        total = sum(t.mass(i) for i in range(len(counts)))
        assert total == pytest.approx(1.0, abs=1e-9)


class TestSampleNoise:
    def test_single_word(self):
        t = build_noise_table(_vocab_from_counts([5]))
        rng = np.random.default_rng(0)
        assert all(sample_noise(t, rng) == 0 for _ in range(100))

    def test_empirical_frequency(self):
        t = build_noise_table(_vocab_from_counts([16, 1]))
        rng = np.random.default_rng(123)
        draws = np.array([sample_noise(t, rng) for _ in range(10**6)])
        freq0 = np.mean(draws == 0)
        assert abs(freq0 - 8 / 9) < 0.01

    def test_deterministic_given_seed(self):
        t = build_noise_table(_vocab_from_counts([9, 4, 1]))
        rng = np.random.default_rng(7)
        seq1 = [sample_noise(t, rng) for _ in range(50)]
        rng = np.random.default_rng(7)
        seq2 = [sample_noise(t, rng) for _ in range(50)]
        assert seq1 == seq2


class TestTokenStream:
    def test_oov_dropped(self):
        v = build_vocab("a a b b c", min_count=2)
        s = encode_tokens("a c b a x", v)
        assert [v.words[i] for i in s.tokens] == ["a", "b", "a"]

    def test_all_indices_valid(self):
        v = build_vocab("a a b", min_count=1)
        s = encode_tokens("b a b a b", v)
        assert np.all(s.tokens >= 0) and np.all(s.tokens < len(v))


class TestVocabularyFile:
    def test_round_trip(self, tmp_path):
        v = build_vocab("dog dog dog cat cat bird", min_count=1)
        p = tmp_path / "vocab.txt"
        v.save(p)
        lines = p.read_text().splitlines()
        assert lines[0] == "dog\t3"
        w = Vocabulary.load(p)
        assert w.words == v.words
        assert list(w.counts) == list(v.counts)
        assert w.total_tokens == v.total_tokens
        assert w.index == v.index
