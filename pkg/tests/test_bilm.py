import numpy as np
import pytest

from crosslab import autodiff as ad
from crosslab.bilm import BiLM, CharCNN, LSTMCell, bilm_forward, char_cnn_encode, lstm_step, train_lm
from crosslab.errors import CorpusError
from crosslab.gradcheck import finite_diff_check
from crosslab.rand import make_rng
from crosslab.vocab import build_vocab

from conftest import tiny_lm_config, toy_stream


def _vocab(words=("abc", "de", "fgh", "ij")):
    return build_vocab(list(words) * 3)


class TestCharCNN:
    def test_deterministic_per_word(self, lm_config):
        cnn = CharCNN(_vocab(), lm_config, make_rng(0))
        a = char_cnn_encode(cnn, "abc")
        b = char_cnn_encode(cnn, "abc")
        assert np.array_equal(a, b)

    def test_independent_of_batch_composition(self, lm_config):
        cnn = CharCNN(_vocab(), lm_config, make_rng(0))
        with ad.no_grad():
            alone = cnn.encode_words(["abc"]).data[0]
        single = char_cnn_encode(cnn, "abc")
        assert np.array_equal(alone, single)

    def test_zero_parameters_give_projection_bias(self, lm_config):
        cnn = CharCNN(_vocab(), lm_config, make_rng(0))
        for p in cnn.parameters().values():
            p.data[...] = 0.0
        cnn.proj_b.data[...] = 0.25
        out = char_cnn_encode(cnn, "abc")
        np.testing.assert_array_equal(out, np.full(lm_config.proj_size, 0.25))

    def test_gradients(self, lm_config):
        cnn = CharCNN(_vocab(), lm_config, make_rng(1))
        params = list(cnn.parameters().values())
        coeff = np.random.default_rng(0).normal(size=(2, lm_config.proj_size))

        def loss():
            return (cnn.encode_words(["abc", "ij"]) * coeff).sum()

        rep = finite_diff_check(loss, params, step=1e-5)
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)

    def test_unknown_chars_fall_back(self, lm_config):
        cnn = CharCNN(_vocab(), lm_config, make_rng(0))
        assert char_cnn_encode(cnn, "zzz").shape == (lm_config.proj_size,)


class TestLSTMCell:
    def test_zero_everything_gives_zero(self):
        cell = LSTMCell(3, 4, None, make_rng(0))
        for p in cell.parameters().values():
            p.data[...] = 0.0
        h, c = lstm_step(np.zeros((1, 3)), np.zeros((1, 4)), np.zeros((1, 4)), cell)
        np.testing.assert_array_equal(h.data, np.zeros((1, 4)))
        np.testing.assert_array_equal(c.data, np.zeros((1, 4)))

    def test_gate_saturation_passes_memory(self):
        cell = LSTMCell(3, 4, None, make_rng(0))
        for p in cell.parameters().values():
            p.data[...] = 0.0
        cell.b["f"].data[...] = 100.0
        cell.b["i"].data[...] = -100.0
        cell.b["o"].data[...] = 100.0
        v = np.array([[0.3, -0.5, 0.9, -1.2]])
        h, c = lstm_step(np.zeros((1, 3)), np.zeros((1, 4)), v, cell)
        np.testing.assert_allclose(c.data, v, atol=1e-8)
        np.testing.assert_allclose(h.data, np.tanh(v), atol=1e-8)

    def test_gradients_all_twelve_groups(self):
        cell = LSTMCell(3, 4, None, make_rng(1))
        params = cell.parameters()
        assert len(params) == 12
        rng = np.random.default_rng(2)
        x = ad.Tensor(rng.normal(size=(2, 3)))
        h0 = ad.Tensor(rng.normal(size=(2, 4)))
        c0 = ad.Tensor(rng.normal(size=(2, 4)))

        def loss():
            h, c = cell.step(x, h0, c0)
            return h.sum() + (c * c).sum()

        rep = finite_diff_check(loss, list(params.values()), step=1e-5)
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)

    def test_gradients_with_projection(self):
        cell = LSTMCell(3, 6, 2, make_rng(3))
        params = cell.parameters()
        assert len(params) == 13
        rng = np.random.default_rng(4)
        x = ad.Tensor(rng.normal(size=(1, 3)))
        h0 = ad.Tensor(rng.normal(size=(1, 2)))
        c0 = ad.Tensor(rng.normal(size=(1, 6)))

        def loss():
            h, c = cell.step(x, h0, c0)
            return (h * h).sum() + c.sum()

        rep = finite_diff_check(loss, list(params.values()), step=1e-5)
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)

    def test_projection_applied_before_exposure(self):
        cell = LSTMCell(3, 6, 2, make_rng(5))
        h, c = lstm_step(np.ones((1, 3)), np.zeros((1, 2)), np.zeros((1, 6)), cell)
        assert h.data.shape == (1, 2)
        assert c.data.shape == (1, 6)


class TestBiLMForward:
    def _lm(self, cfg=None, seed=0):
        cfg = cfg or tiny_lm_config()
        vocab = build_vocab(toy_stream(200, seed=1))
        return BiLM(cfg, vocab, make_rng(seed))

    def test_three_layers_equal_dims(self):
        lm = self._lm()
        embs = bilm_forward(lm, ["w0", "w1", "w2"])
        assert len(embs) == 3
        for e in embs:
            assert e.h0.shape == e.h1.shape == e.h2.shape == (lm.config.layer_dim,)

    def test_deterministic(self):
        lm = self._lm()
        a = bilm_forward(lm, ["w0", "w1"])
        b = bilm_forward(lm, ["w0", "w1"])
        for ea, eb in zip(a, b):
            assert np.array_equal(ea.h1, eb.h1) and np.array_equal(ea.h2, eb.h2)

    def test_neighbor_change_alters_context_layers(self):
        lm = self._lm()
        a = bilm_forward(lm, ["w0", "w1"])[0]
        b = bilm_forward(lm, ["w0", "w2"])[0]
        assert np.array_equal(a.h0, b.h0)  # layer 0 is context-free
        assert not np.array_equal(a.h1, b.h1)

    def test_empty_sentence_rejected(self):
        with pytest.raises(CorpusError):
            bilm_forward(self._lm(), [])

    def test_full_gradient_check_two_token_loss(self):
        lm = self._lm(seed=3)
        params = list(lm.parameters().values())

        def loss():
            return lm.window_loss([["w0", "w1"]])

        rep = finite_diff_check(loss, params, step=1e-5,
                                max_entries_per_param=40,
                                rng=np.random.default_rng(0))
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)


class TestTrainLM:
    def test_loss_decreases_on_toy_corpus(self):
        cfg = tiny_lm_config(epochs=5, batch_size=16)
        out = train_lm({"aa": toy_stream(2000, seed=2)}, cfg)
        assert out.epoch_losses[-1] < out.epoch_losses[0]

    def test_polyglot_symmetric_perplexities(self):
        cfg = tiny_lm_config(epochs=4, batch_size=16)
        stream = toy_stream(1500, seed=3)
        out = train_lm({"aa": list(stream), "bb": list(stream)}, cfg)
        pa = out.model.perplexity(stream[:600])
        pb = out.model.perplexity(stream[:600])
        assert abs(pa - pb) / pa < 0.05

    def test_empty_corpus_rejected(self):
        with pytest.raises(CorpusError):
            train_lm({"aa": []}, tiny_lm_config())

    def test_vocab_mismatch_rejected(self):
        vocab = build_vocab(["only", "these", "words"])
        with pytest.raises(CorpusError, match="vocabulary"):
            train_lm({"aa": toy_stream(50)}, tiny_lm_config(), vocab=vocab)

    def test_seeded_training_bit_reproducible(self):
        cfg = tiny_lm_config(epochs=2, batch_size=8)
        stream = toy_stream(400, seed=4)
        a = train_lm({"aa": list(stream)}, cfg)
        b = train_lm({"aa": list(stream)}, cfg)
        assert a.epoch_losses == b.epoch_losses
        for (na, pa), (nb, pb) in zip(a.model.parameters().items(),
                                      b.model.parameters().items()):
            assert na == nb
            assert np.array_equal(pa.data, pb.data), na


class TestPerplexity:
    def test_uniform_model_equals_vocab_size(self):
        lm = BiLM(tiny_lm_config(), build_vocab(toy_stream(100)), make_rng(0))
        lm.softmax_w.data[...] = 0.0
        lm.softmax_b.data[...] = 0.0
        pp = lm.perplexity(toy_stream(100))
        assert abs(pp - lm.vocab.n_words) / lm.vocab.n_words < 0.01

    def test_training_data_beats_shuffled(self):
        cfg = tiny_lm_config(epochs=5, batch_size=16)
        stream = toy_stream(1500, seed=5)
        out = train_lm({"aa": list(stream)}, cfg)
        shuffled = list(stream)
        np.random.default_rng(6).shuffle(shuffled)
        assert out.model.perplexity(stream) <= out.model.perplexity(shuffled)

    def test_empty_stream_rejected(self):
        lm = BiLM(tiny_lm_config(), build_vocab(["a"]), make_rng(0))
        with pytest.raises(CorpusError):
            lm.perplexity([])


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        from crosslab.checkpoint import load_lm, save_lm
        cfg = tiny_lm_config(epochs=1, batch_size=8)
        out = train_lm({"aa": toy_stream(200, seed=7)}, cfg)
        path = tmp_path / "lm.npz"
        save_lm(path, out.model)
        back = load_lm(path)
        for (na, pa), (nb, pb) in zip(out.model.parameters().items(),
                                      back.parameters().items()):
            assert na == nb and np.array_equal(pa.data, pb.data)
        a = bilm_forward(out.model, ["w0", "w1"])
        b = bilm_forward(back, ["w0", "w1"])
        for ea, eb in zip(a, b):
            assert np.array_equal(ea.h2, eb.h2)

    def test_wrong_kind_rejected(self, tmp_path):
        from crosslab.checkpoint import load_checkpoint, save_checkpoint
        from crosslab.errors import ConfigError
        p = tmp_path / "x.npz"
        save_checkpoint(p, "parser", {}, {"a": np.ones(2)})
        with pytest.raises(ConfigError, match="kind"):
            load_checkpoint(p, "bilm")
