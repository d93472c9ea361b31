import numpy as np
import pytest

from crosslab.dictionary import BilingualDictionary
from crosslab.errors import CorpusError, NumericsError
from crosslab.translate import (RetrievalIndex, cosine_scores, csls_scores,
                                precision_at_1, translate)


def _basis(i, dim=4):
    v = np.zeros(dim)
    v[i] = 1.0
    return v


class TestCslsScores:
    def test_self_case_scores_zero(self):
        idx = RetrievalIndex(["e1"], [_basis(0)], [_basis(0)], k=1)
        np.testing.assert_allclose(csls_scores(_basis(0), idx), [0.0], atol=1e-12)

    def test_two_target_hand_case(self):
        idx = RetrievalIndex(["e1", "e2"], [_basis(0), _basis(1)], [_basis(0)], k=1)
        scores = csls_scores(_basis(0), idx)
        np.testing.assert_allclose(scores, [0.0, -1.0], atol=1e-12)
        assert scores[0] > scores[1]

    def test_constant_shift_per_query(self):
        rng = np.random.default_rng(0)
        tgt = rng.normal(size=(20, 6))
        src = rng.normal(size=(15, 6))
        idx = RetrievalIndex([f"t{i}" for i in range(20)], tgt, src, k=3)
        x = rng.normal(size=6)
        full = csls_scores(x, idx)
        unshifted = 2.0 * cosine_scores(x, idx) - idx.r_src
        np.testing.assert_allclose(np.argsort(full), np.argsort(unshifted))
        np.testing.assert_allclose(full - unshifted, np.full(20, full[0] - unshifted[0]),
                                   atol=1e-12)

    def test_scale_invariance(self):
        rng = np.random.default_rng(1)
        tgt = rng.normal(size=(10, 5))
        src = rng.normal(size=(8, 5))
        idx1 = RetrievalIndex([f"t{i}" for i in range(10)], tgt, src, k=2)
        idx2 = RetrievalIndex([f"t{i}" for i in range(10)], 2 * tgt, 2 * src, k=2)
        x = rng.normal(size=5)
        np.testing.assert_allclose(csls_scores(x, idx1), csls_scores(2 * x, idx2),
                                   atol=1e-12)

    def test_zero_query_rejected(self):
        idx = RetrievalIndex(["e1"], [_basis(0)], [_basis(0)], k=1)
        with pytest.raises(NumericsError):
            csls_scores(np.zeros(4), idx)

    def test_k_bounds_validated(self):
        with pytest.raises(NumericsError):
            RetrievalIndex(["e1"], [_basis(0)], [_basis(0)], k=2)


class TestTranslate:
    def test_cosine_matches_brute_force_50(self):
        rng = np.random.default_rng(2)
        tgt = rng.normal(size=(50, 8))
        words = [f"t{i:02d}" for i in range(50)]
        idx = RetrievalIndex(words, tgt, rng.normal(size=(10, 8)), k=5)
        unit = tgt / np.linalg.norm(tgt, axis=1)[:, None]
        for q in range(50):
            x = rng.normal(size=8)
            ranked = translate([(f"q{q}", x)], idx, mode="cosine", topn=1)[0]
            brute = words[int(np.argmax(unit @ (x / np.linalg.norm(x))))]
            assert ranked.top == brute

    def test_query_equal_to_unique_target_wins(self):
        rng = np.random.default_rng(3)
        tgt = rng.normal(size=(12, 5))
        words = [f"t{i}" for i in range(12)]
        idx = RetrievalIndex(words, tgt, rng.normal(size=(12, 5)), k=2)
        ranked = translate([("q", tgt[7])], idx, mode="cosine")[0]
        assert ranked.top == "t7"

    def test_deterministic_tie_break_lexicographic(self):
        # two identical targets: the lexicographically smaller word wins
        idx = RetrievalIndex(["zz", "aa"], [_basis(0), _basis(0)], [_basis(0)], k=1)
        ranked = translate([("q", _basis(0))], idx, mode="cosine")[0]
        assert ranked.top == "aa"

    def test_planted_rotation_full_recovery(self):
        rng = np.random.default_rng(4)
        dim, n = 16, 80
        src = rng.normal(size=(n, dim))
        rot = np.linalg.qr(rng.normal(size=(dim, dim)))[0]
        tgt = src @ rot.T
        words = [f"t{i}" for i in range(n)]
        idx = RetrievalIndex(words, tgt, src, k=10)
        queries = [(f"t{i}", rot @ src[i]) for i in range(n)]
        ranked = translate(queries, idx, mode="csls")
        gold_first = sum(1 for r in ranked if r.top == r.query)
        assert gold_first / n >= 0.95

    def test_empty_index_rejected(self):
        rng = np.random.default_rng(5)
        with pytest.raises(NumericsError):
            RetrievalIndex([], np.zeros((0, 3)), rng.normal(size=(2, 3)), k=1)


class TestPrecisionAt1:
    def _ranked(self, pairs):
        from crosslab.translate import RankedList
        return [RankedList(q, ((t, 1.0),)) for q, t in pairs]

    def test_all_correct(self):
        ranked = self._ranked([("a", "x"), ("b", "y")])
        d = BilingualDictionary((("a", "x"), ("b", "y")), split="test")
        assert precision_at_1(ranked, d).p_at_1 == 1.0

    def test_none_correct(self):
        ranked = self._ranked([("a", "wrong"), ("b", "wrong")])
        d = BilingualDictionary((("a", "x"), ("b", "y")), split="test")
        assert precision_at_1(ranked, d).p_at_1 == 0.0

    def test_three_of_four_with_multi_target(self):
        ranked = self._ranked([("a", "x"), ("b", "y2"), ("c", "z"), ("d", "bad")])
        d = BilingualDictionary((("a", "x"), ("b", "y1"), ("b", "y2"),
                                 ("c", "z"), ("d", "w")), split="test")
        score = precision_at_1(ranked, d)
        assert score.p_at_1 == 0.75
        assert score.evaluated == 4

    def test_missing_sources_skipped_and_counted(self):
        ranked = self._ranked([("a", "x")])
        d = BilingualDictionary((("a", "x"), ("notqueried", "y")), split="test")
        score = precision_at_1(ranked, d)
        assert score.evaluated == 1 and score.skipped == 1

    def test_zero_evaluable_rejected(self):
        ranked = self._ranked([("a", "x")])
        d = BilingualDictionary((("other", "y"),), split="test")
        with pytest.raises(CorpusError):
            precision_at_1(ranked, d)
