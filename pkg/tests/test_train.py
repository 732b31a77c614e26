import numpy as np
import pytest

from morphvec.corpus import TokenStream, build_noise_table, build_vocab, encode_tokens
from morphvec.model import TrainingConfig
from morphvec.morphology import MorphKind
from morphvec.relation import RelationMatrix, build_relation
from morphvec.train import count_steps, mix_seed, train

from reference_sgns import train_plain_sgns


def toy_corpus(rng, vocab_words, n_tokens):
    probs = 1.0 / np.arange(1, len(vocab_words) + 1)
    probs /= probs.sum()
    draws = rng.choice(len(vocab_words), size=n_tokens, p=probs)
    return " ".join(vocab_words[i] for i in draws)


def empty_relation(V):
    return RelationMatrix(kind=MorphKind.EDIT, k=1,
                          indptr=np.zeros(V + 1, dtype=np.int64),
                          neighbors=np.zeros(0, dtype=np.int32),
                          weights=np.zeros(0, dtype=np.float64))


@pytest.fixture(scope="module")
def small_stream():
    rng = np.random.default_rng(7)
    words = [w + s for w in ["run", "walk", "talk", "jump", "look"]
             for s in ["", "s", "ed", "ing"]]
    text = toy_corpus(rng, words, 4000)
    vocab = build_vocab(text, min_count=1)
    return encode_tokens(text, vocab)


class TestCountSteps:
    def test_small_cases(self):
        # T=3, N=1: pairs = 1 + 2 + 1
        assert count_steps(3, 1) == 4
        # T=1: no pairs
        assert count_steps(1, 5) == 0
        # interior positions contribute 2N each
        assert count_steps(100, 2) == 4 * 100 - 2 * (1 + 2)


class TestDegenerateEquivalence:
    def test_per_step_losses_match_reference(self, small_stream):
        stream = small_stream
        V = len(stream.vocab)
        cfg = TrainingConfig(dim=16, window=3, negatives=3, buckets=1,
                             lr=0.025, epochs=2, seed=42,
                             freeze_relation=True, freeze_coeffs=True,
                             c1_init=1.0, c2_init=0.0, threads=1)
        model = train(stream, empty_relation(V), cfg, record_losses=True)

        cum = build_noise_table(stream.vocab).cumulative
        M_ref, Mout_ref, losses_ref = train_plain_sgns(
            stream.tokens, cum, V, 16, window=3, k_neg=3, lr0=0.025,
            epochs=2, seed=42, max_record=10_000)

        n = min(10_000, len(losses_ref), len(model.step_losses))
        assert n >= 10_000 or n == count_steps(len(stream), 3) * 2
        np.testing.assert_allclose(model.step_losses[:n], losses_ref[:n],
                                   atol=1e-6, rtol=0)
        # end-state parameters agree too
        np.testing.assert_allclose(model.M, M_ref, atol=1e-9)
        np.testing.assert_allclose(model.M_out, Mout_ref, atol=1e-9)

    def test_nonempty_relation_still_degenerate(self, small_stream):
        # with c1=1, c2=0 and freezes on, neighbors contribute nothing
        stream = small_stream
        V = len(stream.vocab)
        rel = build_relation(stream.vocab, MorphKind.EDIT, k=3)
        cfg = TrainingConfig(dim=8, window=2, negatives=2, buckets=1,
                             lr=0.025, epochs=1, seed=5,
                             freeze_relation=True, freeze_coeffs=True,
                             c1_init=1.0, c2_init=0.0, threads=1)
        m1 = train(stream, rel.copy(), cfg, record_losses=True)
        m2 = train(stream, empty_relation(V), cfg, record_losses=True)
        np.testing.assert_allclose(m1.step_losses, m2.step_losses, atol=1e-12)


class TestTrainContracts:
    def test_deterministic_same_seed(self, small_stream):
        stream = small_stream
        rel = build_relation(stream.vocab, MorphKind.EDIT, k=3)
        cfg = TrainingConfig(dim=12, window=2, negatives=3, buckets=4,
                             epochs=1, seed=11, threads=1)
        a = train(stream, rel.copy(), cfg)
        b = train(stream, rel.copy(), cfg)
        assert np.array_equal(a.M, b.M)
        assert np.array_equal(a.M_out, b.M_out)
        assert np.array_equal(a.c1, b.c1)

    def test_relation_structure_invariant(self, small_stream):
        stream = small_stream
        rel = build_relation(stream.vocab, MorphKind.EDIT, k=3)
        indptr0 = rel.indptr.copy()
        nbrs0 = rel.neighbors.copy()
        wts0 = rel.weights.copy()
        cfg = TrainingConfig(dim=12, window=2, negatives=2, buckets=4,
                             epochs=1, seed=1, threads=1)
        train(stream, rel, cfg)
        assert np.array_equal(rel.indptr, indptr0)
        assert np.array_equal(rel.neighbors, nbrs0)
        # weights did learn
        assert not np.array_equal(rel.weights, wts0)

    def test_freeze_relation_weights_bit_identical(self, small_stream):
        stream = small_stream
        rel = build_relation(stream.vocab, MorphKind.EDIT, k=3)
        wts0 = rel.weights.copy()
        cfg = TrainingConfig(dim=12, window=2, negatives=2, buckets=4,
                             epochs=1, seed=1, threads=1, freeze_relation=True)
        train(stream, rel, cfg)
        assert np.array_equal(rel.weights, wts0)

    def test_boundary_positions_trained_in_bounds(self):
        # 3-token stream, window 5: only in-bounds pairs -> 6 steps total
        vocab = build_vocab("aa bb cc", min_count=1)
        stream = encode_tokens("aa bb cc", vocab)
        cfg = TrainingConfig(dim=4, window=5, negatives=1, buckets=1,
                             epochs=1, seed=2, threads=1)
        model = train(stream, empty_relation(len(vocab)), cfg,
                      record_losses=True)
        assert len(model.step_losses) == count_steps(3, 5)
        assert count_steps(3, 5) == 6

    def test_parameters_finite_and_loss_improves(self, small_stream):
        stream = small_stream
        rel = build_relation(stream.vocab, MorphKind.EDIT, k=3)
        cfg = TrainingConfig(dim=16, window=3, negatives=3, buckets=4,
                             epochs=3, seed=3, threads=1)
        model = train(stream, rel, cfg)
        assert model.all_finite()
        assert model.epoch_losses[-1] > model.epoch_losses[0]

    def test_empty_stream_rejected(self):
        vocab = build_vocab("aa bb", min_count=1)
        stream = TokenStream(tokens=np.zeros(0, dtype=np.int32), vocab=vocab)
        with pytest.raises(ValueError):
            train(stream, empty_relation(2), TrainingConfig(dim=4))

    def test_parallel_mode_smoke(self, small_stream):
        stream = small_stream
        rel = build_relation(stream.vocab, MorphKind.EDIT, k=3)
        cfg = TrainingConfig(dim=8, window=2, negatives=2, buckets=2,
                             epochs=1, seed=4, threads=2)
        model = train(stream, rel, cfg)
        assert model.all_finite()

    def test_record_losses_requires_deterministic(self, small_stream):
        rel = build_relation(small_stream.vocab, MorphKind.EDIT, k=2)
        cfg = TrainingConfig(dim=4, threads=2)
        with pytest.raises(ValueError):
            train(small_stream, rel, cfg, record_losses=True)

    def test_dynamic_window_smoke(self, small_stream):
        rel = build_relation(small_stream.vocab, MorphKind.EDIT, k=2)
        cfg = TrainingConfig(dim=8, window=3, negatives=2, buckets=2,
                             epochs=1, seed=6, threads=1, dynamic_window=True)
        model = train(small_stream, rel, cfg)
        assert model.all_finite()


class TestMixSeed:
    def test_kernel_matches_python(self):
        from morphvec.train import _mix_seed

        for seed, epoch, shard in [(1, 0, 0), (42, 3, 1), (7, 10, 5)]:
            assert int(_mix_seed(seed, epoch, shard)) == mix_seed(seed, epoch, shard)

    def test_distinct_streams(self):
        seen = {mix_seed(s, e, w) for s in range(3) for e in range(3)
                for w in range(3)}
        assert len(seen) == 27
