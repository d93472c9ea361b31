import numpy as np
import pytest

from crosslab.align import (AlignmentMap, AnchorTable, apply_alignment, compute_anchors,
                            fit_alignment, load_alignment, read_alignment, save_alignment,
                            write_alignment)
from crosslab.bilm import BiLM, bilm_forward
from crosslab.dictionary import BilingualDictionary
from crosslab.errors import CorpusError, NumericsError
from crosslab.layers import LayeredEmbedding
from crosslab.mix import ScalarMix, scalar_mix
from crosslab.rand import make_rng
from crosslab.vocab import build_vocab

from conftest import tiny_lm_config, toy_stream


def _lm(seed=0):
    return BiLM(tiny_lm_config(), build_vocab(toy_stream(300, seed=1)), make_rng(seed))


def _random_table(rng, words, dim):
    return {w: LayeredEmbedding(rng.normal(size=dim), rng.normal(size=dim),
                                rng.normal(size=dim)) for w in words}


class _Table(dict):
    def get(self, k, default=None):
        return dict.get(self, k, default)


class TestAnchors:
    def test_single_occurrence_equals_contextual(self):
        lm = _lm()
        sent = ["w0", "w1", "w2"]
        anchors = compute_anchors(lm, [sent])
        embs = bilm_forward(lm, sent)
        for w, e in zip(sent, embs):
            for va, vb in zip(anchors[w].layers, e.layers):
                assert np.array_equal(va, vb)

    def test_two_occurrences_average(self):
        lm = _lm()
        s1, s2 = ["w0", "w1"], ["w2", "w0"]
        anchors = compute_anchors(lm, [s1, s2])
        u = bilm_forward(lm, s1)[0]
        v = bilm_forward(lm, s2)[1]
        for j in range(3):
            np.testing.assert_allclose(anchors["w0"].layers[j],
                                       (u.layers[j] + v.layers[j]) / 2, atol=1e-12)
        assert anchors.counts["w0"] == 2

    def test_doubled_corpus_same_anchors(self):
        lm = _lm()
        sents = [["w0", "w1"], ["w1", "w2", "w3"], ["w0"]]
        a = compute_anchors(lm, sents)
        b = compute_anchors(lm, sents + sents)
        for w in a.vectors:
            for va, vb in zip(a[w].layers, b[w].layers):
                np.testing.assert_allclose(va, vb, atol=1e-12)

    def test_empty_corpus_rejected(self):
        with pytest.raises(CorpusError):
            compute_anchors(_lm(), [])


class TestFitAlignment:
    def test_identity_fixture(self):
        rng = np.random.default_rng(0)
        words = [f"w{i}" for i in range(20)]
        table = _Table(_random_table(rng, words, 6))
        d = BilingualDictionary(tuple((w, w) for w in words))
        amap = fit_alignment(table, table, d, method="procrustes")
        for w in amap.maps:
            assert np.abs(w - np.eye(6)).max() <= 1e-8

    def test_planted_rotation_recovered(self):
        rng = np.random.default_rng(1)
        dim, n = 16, 64
        words = [f"w{i}" for i in range(n)]
        src = _Table(_random_table(rng, words, dim))
        rots = [np.linalg.qr(rng.normal(size=(dim, dim)))[0] for _ in range(3)]
        tgt = _Table({w: LayeredEmbedding(*[r @ v for r, v in zip(rots, src[w].layers)])
                      for w in words})
        d = BilingualDictionary(tuple((w, w) for w in words))
        amap = fit_alignment(src, tgt, d, method="procrustes")
        for w_fit, r in zip(amap.maps, rots):
            assert np.abs(w_fit - r).max() <= 1e-8

    def test_procrustes_optimality(self):
        rng = np.random.default_rng(2)
        dim, n = 6, 30
        words = [f"w{i}" for i in range(n)]
        src = _Table(_random_table(rng, words, dim))
        tgt = _Table(_random_table(rng, words, dim))
        d = BilingualDictionary(tuple((w, w) for w in words))
        amap = fit_alignment(src, tgt, d, method="procrustes")
        h_s = np.stack([src[w].h1 for w in words], axis=1)
        h_t = np.stack([tgt[w].h1 for w in words], axis=1)
        w1 = amap.maps[1]
        best = np.linalg.norm(w1 @ h_s - h_t)
        for _ in range(100):
            q = np.linalg.qr(np.eye(dim) + 0.01 * rng.normal(size=(dim, dim)))[0]
            assert best <= np.linalg.norm(q @ w1 @ h_s - h_t) + 1e-9

    def test_all_pairs_absent_rejected(self):
        rng = np.random.default_rng(3)
        table = _Table(_random_table(rng, ["a", "b"], 4))
        d = BilingualDictionary((("x", "y"),))
        with pytest.raises(CorpusError, match="0 usable pairs"):
            fit_alignment(table, table, d)

    def test_skipped_pairs_counted(self):
        rng = np.random.default_rng(4)
        table = _Table(_random_table(rng, ["a", "b", "c", "d", "e"], 4))
        d = BilingualDictionary((("a", "a"), ("b", "b"), ("c", "c"),
                                 ("d", "d"), ("missing", "a")))
        amap = fit_alignment(table, table, d)
        assert amap.usable_pairs == 4 and amap.skipped_pairs == 1

    def test_least_squares_under_determined_flagged(self):
        rng = np.random.default_rng(5)
        table = _Table(_random_table(rng, ["a", "b"], 8))
        d = BilingualDictionary((("a", "a"), ("b", "b")))
        amap = fit_alignment(table, table, d, method="least-squares")
        assert amap.rank_deficient

    def test_layer_permutation_independence(self):
        rng = np.random.default_rng(6)
        words = [f"w{i}" for i in range(12)]
        src = _Table(_random_table(rng, words, 5))
        tgt = _Table(_random_table(rng, words, 5))
        d = BilingualDictionary(tuple((w, w) for w in words))
        base = fit_alignment(src, tgt, d)
        perm = [2, 0, 1]
        src_p = _Table({w: LayeredEmbedding(*[src[w].layers[j] for j in perm]) for w in words})
        tgt_p = _Table({w: LayeredEmbedding(*[tgt[w].layers[j] for j in perm]) for w in words})
        permuted = fit_alignment(src_p, tgt_p, d)
        for jp, j in enumerate(perm):
            np.testing.assert_allclose(permuted.maps[jp], base.maps[j], atol=1e-12)

    def test_orthogonality_invariant_enforced(self):
        with pytest.raises(NumericsError, match="orthogonal"):
            AlignmentMap((np.eye(3) * 2, np.eye(3), np.eye(3)), "procrustes")


class TestApplyAlignment:
    def test_identity_map_reduces_to_scalar_mix(self):
        rng = np.random.default_rng(7)
        e = LayeredEmbedding(rng.normal(size=4), rng.normal(size=4), rng.normal(size=4))
        mix = ScalarMix((0.3, -0.2, 0.9), gamma=1.7)
        np.testing.assert_allclose(apply_alignment(e, None, mix),
                                   scalar_mix(e, mix).data, atol=1e-12)
        np.testing.assert_allclose(apply_alignment(e, AlignmentMap.identity(4), mix),
                                   scalar_mix(e, mix).data, atol=1e-12)

    def test_one_hot_mix_selects_mapped_layer(self):
        rng = np.random.default_rng(8)
        e = LayeredEmbedding(rng.normal(size=3), rng.normal(size=3), rng.normal(size=3))
        q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        amap = AlignmentMap((np.eye(3), q, np.eye(3)), "procrustes")
        mix = ScalarMix((-200.0, 200.0, -200.0), gamma=2.5)
        np.testing.assert_allclose(apply_alignment(e, amap, mix), 2.5 * (q @ e.h1), atol=1e-8)

    def test_hand_computed_two_dim_case(self):
        e = LayeredEmbedding(np.array([1.0, 0.0]), np.array([0.0, 1.0]),
                             np.array([0.0, 0.0]))
        amap = AlignmentMap((2 * np.eye(2), 2 * np.eye(2), np.eye(2)), "least-squares")
        gamma = 0.8
        mix = ScalarMix((50.0, 50.0, -50.0), gamma=gamma)
        np.testing.assert_allclose(apply_alignment(e, amap, mix),
                                   gamma * np.array([1.0, 1.0]), atol=1e-8)

    def test_dim_mismatch_rejected(self):
        e = LayeredEmbedding(np.zeros(3) + 1, np.ones(3), np.ones(3))
        with pytest.raises(NumericsError, match="dim mismatch"):
            AlignmentMap.identity(5).apply(e)


class TestSerialization:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(9)
        words = [f"w{i}" for i in range(10)]
        src = _Table(_random_table(rng, words, 4))
        tgt = _Table(_random_table(rng, words, 4))
        d = BilingualDictionary(tuple((w, w) for w in words),
                                source_language="aa", target_language="bb")
        amap = fit_alignment(src, tgt, d, method="procrustes")
        back = read_alignment(write_alignment(amap))
        assert back.method == "procrustes"
        assert back.source_language == "aa" and back.target_language == "bb"
        assert back.usable_pairs == 10
        for wa, wb in zip(amap.maps, back.maps):
            assert np.array_equal(wa, wb)

    def test_file_round_trip(self, tmp_path):
        amap = AlignmentMap.identity(3, source_language="xx", target_language="en")
        p = tmp_path / "map.txt"
        save_alignment(p, amap)
        back = load_alignment(p)
        assert back.dim == 3 and back.source_language == "xx"
