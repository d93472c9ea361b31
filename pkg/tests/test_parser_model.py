import numpy as np
import pytest

from crosslab import autodiff as ad
from crosslab.conllu import Sentence
from crosslab.errors import NumericsError
from crosslab.gradcheck import finite_diff_check
from crosslab.layers import LayeredEmbedding
from crosslab.parser import ParserConfig, ParserModel, batch_loss, biaffine_scores, parse_loss
from crosslab.rand import make_rng


def tiny_parser_config(**kw):
    base = dict(lstm_size=4, lstm_layers=2, arc_mlp=5, label_mlp=3,
                input_dropout=0.0, lstm_dropout=0.0, batch_size=4, seed=3)
    base.update(kw)
    return ParserConfig(**base)


def _model(labels=("root", "obj", "det"), input_dim=6, **kw):
    return ParserModel(tiny_parser_config(**kw), labels, input_dim, make_rng(5))


class _StubEmbedder:
    """Deterministic pseudo-random layers keyed by word."""

    def __init__(self, dim=6):
        self.dim = dim

    def layers(self, sentence):
        out = np.zeros((3, len(sentence), self.dim))
        for i, w in enumerate(sentence.tokens):
            rng = np.random.default_rng(abs(hash(w)) % (2**32))
            out[:, i, :] = rng.normal(size=(3, self.dim))
        return out


def _stack(sentence, emb, t=None):
    layers = emb.layers(sentence)
    t = t or layers.shape[1]
    out = np.zeros((3, 1, t, layers.shape[2]))
    out[:, 0, : layers.shape[1], :] = layers
    return ad.Tensor(out)


def _sentence(words, heads=None, labels=None):
    n = len(words)
    heads = heads or tuple([0] + [1] * (n - 1))
    labels = labels or tuple(["root"] + ["obj"] * (n - 1))
    return Sentence(tuple(words), tuple(heads), tuple(labels), "xx")


class TestEncode:
    def test_eval_mode_deterministic(self):
        model = _model()
        emb = _StubEmbedder()
        s = _sentence(["a", "b", "c"])
        x = _stack(s, emb)
        a = model.encode(x).data
        b = model.encode(x).data
        assert np.array_equal(a, b)

    def test_state_dim_is_twice_lstm_size(self):
        model = _model()
        s = _sentence(["a", "b"])
        states = model.encode(_stack(s, _StubEmbedder()))
        assert states.shape == (1, 3, 2 * model.config.lstm_size)

    def test_padding_does_not_change_states(self):
        model = _model()
        emb = _StubEmbedder()
        s = _sentence(["a", "b", "c"])
        plain = model.encode(_stack(s, emb)).data[0]
        padded = model.encode(_stack(s, emb, t=6),
                              mask=np.array([[1.0, 1, 1, 0, 0, 0]])).data[0]
        np.testing.assert_allclose(padded[: 4], plain, atol=1e-12)

    def test_gradients_through_encoder(self):
        model = _model(lstm_size=3, lstm_layers=3, input_dim=4)
        emb = _StubEmbedder(dim=4)
        s = _sentence(["a", "b"])
        x = _stack(s, emb)
        coeff = np.random.default_rng(0).normal(size=(1, 3, 6))

        def loss():
            return (model.encode(x) * coeff).sum()

        rep = finite_diff_check(loss, list(model.parameters().values()), step=1e-5,
                                max_entries_per_param=20, rng=np.random.default_rng(1))
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)


class TestBiaffineScores:
    def test_hand_arithmetic_identity_mlp(self):
        model = _model(lstm_size=1, arc_mlp=2, input_dim=2)
        # make the arc-head/dep MLPs pass positive states through unchanged
        model.arc_head_w.data = np.eye(2)
        model.arc_head_b.data[...] = 0.0
        model.arc_dep_w.data = np.eye(2)
        model.arc_dep_b.data[...] = 0.0
        model.u_arc.data = np.eye(2)
        model.b_arc.data[...] = 0.0
        states = ad.Tensor(np.array([[1.0, 2.0], [3.0, 4.0]]))  # root, one token
        scores = biaffine_scores(model, states)
        assert scores.arcs.shape == (2, 1)
        np.testing.assert_allclose(scores.arcs.data[0, 0], 11.0, atol=1e-12)

    def test_orthogonal_states_score_zero(self):
        model = _model(lstm_size=1, arc_mlp=2, input_dim=2)
        model.arc_head_w.data = np.eye(2)
        model.arc_head_b.data[...] = 0.0
        model.arc_dep_w.data = np.eye(2)
        model.arc_dep_b.data[...] = 0.0
        model.u_arc.data = np.eye(2)
        model.b_arc.data[...] = 0.0
        states = ad.Tensor(np.array([[1.0, 0.0], [0.0, 1.0]]))
        scores = biaffine_scores(model, states)
        np.testing.assert_allclose(scores.arcs.data[0, 0], 0.0, atol=1e-12)

    def test_full_gradient_check_three_tokens(self):
        model = _model(lstm_size=3, lstm_layers=2, arc_mlp=4, label_mlp=2, input_dim=4)
        emb = _StubEmbedder(dim=4)
        s = _sentence(["a", "b", "c"], heads=(0, 1, 1), labels=("root", "obj", "det"))
        x = _stack(s, emb)

        def loss():
            states = model.encode(x)
            flat = ad.reshape(states, (states.shape[1], states.shape[2]))
            return parse_loss(biaffine_scores(model, flat), s)

        rep = finite_diff_check(loss, list(model.parameters().values()), step=1e-5,
                                max_entries_per_param=15, rng=np.random.default_rng(2))
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)


class TestParseLoss:
    def _uniform_scores(self, model, n):
        from crosslab.parser.scoring import ArcScores
        arcs = ad.Tensor(np.zeros((n + 1, n)))
        labels = ad.Tensor(np.zeros((n + 1, n, len(model.labels))))
        return ArcScores(arcs, labels, model.labels)

    def test_uniform_head_ce_is_log_n(self):
        model = _model()
        n = 4
        s = _sentence(["a", "b", "c", "d"], heads=(0, 1, 1, 2),
                      labels=("root", "obj", "obj", "det"))
        loss = parse_loss(self._uniform_scores(model, n), s)
        # n candidates per token (self-arcs excluded) plus uniform label CE
        expected = np.log(n) + np.log(len(model.labels))
        np.testing.assert_allclose(float(loss.data), expected, atol=1e-9)

    def test_saturated_gold_head_gives_zero_head_ce(self):
        from crosslab.parser.scoring import ArcScores
        model = _model()
        n = 2
        s = _sentence(["a", "b"], heads=(0, 1), labels=("root", "obj"))
        arcs = np.zeros((3, 2))
        arcs[0, 0] = 1e6  # gold head of token 1
        arcs[1, 1] = 1e6  # gold head of token 2
        labels = np.zeros((3, 2, len(model.labels)))
        scores = ArcScores(ad.Tensor(arcs), ad.Tensor(labels), model.labels)
        loss = parse_loss(scores, s)
        np.testing.assert_allclose(float(loss.data), np.log(len(model.labels)), atol=1e-6)

    def test_unknown_gold_label_rejected(self):
        model = _model(labels=("root", "obj"))
        s = _sentence(["a", "b"], labels=("root", "weird"))
        with pytest.raises(NumericsError, match="inventory"):
            parse_loss(self._uniform_scores(model, 2), s)

    def test_loss_gradient(self):
        model = _model(lstm_size=2, arc_mlp=3, label_mlp=2, input_dim=4)
        emb = _StubEmbedder(dim=4)
        s = _sentence(["a", "b"], heads=(0, 1), labels=("root", "obj"))
        x = _stack(s, emb)

        def loss():
            states = model.encode(x)
            flat = ad.reshape(states, (states.shape[1], states.shape[2]))
            return parse_loss(biaffine_scores(model, flat), s)

        rep = finite_diff_check(loss, list(model.parameters().values()), step=1e-5,
                                max_entries_per_param=20, rng=np.random.default_rng(3))
        assert rep.ok(1e-4), (rep.worst_param, rep.max_rel_error)


class TestBatchConsistency:
    def test_batched_loss_equals_token_weighted_single_losses(self):
        model = _model(input_dim=6)
        emb = _StubEmbedder(dim=6)
        sents = [
            _sentence(["a", "b", "c"], heads=(0, 1, 1), labels=("root", "obj", "det")),
            _sentence(["d", "e"], heads=(2, 0), labels=("obj", "root")),
        ]
        batched = float(batch_loss(model, sents, emb).data)
        total, n = 0.0, 0
        for s in sents:
            x = _stack(s, emb)
            states = model.encode(x)
            flat = ad.reshape(states, (states.shape[1], states.shape[2]))
            total += float(parse_loss(biaffine_scores(model, flat), s).data) * len(s)
            n += len(s)
        np.testing.assert_allclose(batched, total / n, atol=1e-9)
