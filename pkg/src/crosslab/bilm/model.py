"""Bidirectional two-layer LSTM language model over character-CNN inputs.

Each token of a sentence gets three equal-width vectors: layer 0 is the
character-CNN output duplicated (forward half = backward half), layers 1 and
2 concatenate the forward and backward LSTM states. With skip connections
the second LSTM layer reads layer-1 output plus layer-1 input.

Sentence boundary symbols exist only as softmax prediction targets (the
forward head predicts </s> after the last token, the backward head predicts
<s> before the first); they never enter the recurrence, so the state of a
token in a single-token sentence is exactly its zero-context state.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import CorpusError, NumericsError
from ..layers import LayeredEmbedding
from ..rand import make_rng
from ..vocab import BOS, EOS, Vocabulary
from .charcnn import CharCNN
from .config import LMConfig
from .lstm import LSTMCell

DIRECTIONS = ("fwd", "bwd")


class BiLM:
    def __init__(self, config: LMConfig, vocab: Vocabulary,
                 rng: np.random.Generator | None = None):
        if rng is None:
            rng = make_rng(config.seed)
        self.config = config
        self.vocab = vocab
        self.charcnn = CharCNN(vocab, config, rng)
        self.cells: dict[tuple[str, int], LSTMCell] = {}
        for d in DIRECTIONS:
            for layer in (0, 1):
                self.cells[(d, layer)] = LSTMCell(
                    config.proj_size, config.lstm_size, config.proj_size, rng,
                    prefix=f"lstm.{d}{layer}")
        self.softmax_w = ad.parameter(
            rng.normal(0.0, np.sqrt(1.0 / config.proj_size),
                       size=(config.proj_size, vocab.n_words)), "softmax.w")
        self.softmax_b = ad.parameter(np.zeros(vocab.n_words), "softmax.b")
        self._frozen = False
        self._cnn_cache: dict[str, np.ndarray] = {}

    # -- parameters ----------------------------------------------------------

    def parameters(self) -> dict[str, Tensor]:
        out = dict(self.charcnn.parameters())
        for key in sorted(self.cells):
            out.update(self.cells[key].parameters())
        out["softmax.w"] = self.softmax_w
        out["softmax.b"] = self.softmax_b
        return out

    def freeze(self) -> "BiLM":
        """Mark parameters fixed and enable the per-word CNN cache."""
        self._frozen = True
        return self

    # -- encoding ------------------------------------------------------------

    def _cnn_single(self, word: str) -> np.ndarray:
        if self._frozen:
            hit = self._cnn_cache.get(word)
            if hit is not None:
                return hit
        with ad.no_grad():
            vec = self.charcnn.encode_words([word]).data[0]
        if self._frozen:
            self._cnn_cache[word] = vec
        return vec

    def _run_direction(self, x_seq: Sequence[Tensor], direction: str,
                       train_rng: np.random.Generator | None = None
                       ) -> tuple[list[Tensor], list[Tensor]]:
        """Both LSTM layers over a sequence of (B, proj) inputs. Returns
        per-position layer-1 and layer-2 states (position-indexed regardless
        of direction)."""
        t_order = range(len(x_seq)) if direction == "fwd" else range(len(x_seq) - 1, -1, -1)
        batch = x_seq[0].shape[0]

        cell1 = self.cells[(direction, 0)]
        fused1 = cell1.fused()
        h, c = cell1.zero_state(batch)
        h1: list[Tensor | None] = [None] * len(x_seq)
        for t in t_order:
            h, c = cell1.step(x_seq[t], h, c, fused1)
            h1[t] = h

        if self.config.skip_connections:
            in2 = [h1[t] + x_seq[t] for t in range(len(x_seq))]
        else:
            in2 = list(h1)
        if train_rng is not None and self.config.dropout > 0:
            in2 = [ad.dropout(v, self.config.dropout, train_rng) for v in in2]

        cell2 = self.cells[(direction, 1)]
        fused2 = cell2.fused()
        h, c = cell2.zero_state(batch)
        h2: list[Tensor | None] = [None] * len(x_seq)
        for t in t_order:
            h, c = cell2.step(in2[t], h, c, fused2)
            h2[t] = h
        return h1, h2  # type: ignore[return-value]

    def sentence_layers(self, tokens: Sequence[str]) -> list[LayeredEmbedding]:
        """Contextual layered embeddings for one sentence (no gradients).

        Recurrent states start at zero at the first token of each direction;
        boundary symbols are not part of the recurrence and no states are
        emitted for them.
        """
        if not tokens:
            raise CorpusError("cannot embed an empty sentence")
        with ad.no_grad():
            x_seq = [ad.Tensor(self._cnn_single(w)[None, :]) for w in tokens]
            states = {d: self._run_direction(x_seq, d) for d in DIRECTIONS}
            out = []
            for i, _ in enumerate(tokens):
                x = x_seq[i].data[0]
                h0 = np.concatenate([x, x])
                h1 = np.concatenate([states["fwd"][0][i].data[0], states["bwd"][0][i].data[0]])
                h2 = np.concatenate([states["fwd"][1][i].data[0], states["bwd"][1][i].data[0]])
                out.append(LayeredEmbedding(h0, h1, h2))
        return out

    # -- training loss ---------------------------------------------------------

    def window_loss(self, windows: Sequence[Sequence[str]],
                    train_rng: np.random.Generator | None = None) -> Tensor:
        """Joint forward+backward NLL per prediction over equal-length token
        windows. The forward head at the last position predicts </s>; the
        backward head at the first position predicts <s>."""
        b = len(windows)
        t = len(windows[0])
        if any(len(w) != t for w in windows):
            raise NumericsError("windows in a batch must have equal length")
        if t < 1:
            raise CorpusError("windows must contain at least 1 token")

        uniq: dict[str, int] = {}
        flat_idx = np.empty((b, t), dtype=np.intp)
        for i, win in enumerate(windows):
            for j, w in enumerate(win):
                if w not in uniq:
                    uniq[w] = len(uniq)
                flat_idx[i, j] = uniq[w]
        cnn_out = self.charcnn.encode_words(list(uniq))  # (U, proj)
        x_seq = [cnn_out[flat_idx[:, j]] for j in range(t)]  # T x (B, proj)

        ids = np.array([[self.vocab.word_id(w) for w in win] for win in windows])
        bos, eos = self.vocab.word_to_id[BOS], self.vocab.word_to_id[EOS]
        fwd_gold = np.concatenate([ids[:, 1:], np.full((b, 1), eos)], axis=1)
        bwd_gold = np.concatenate([np.full((b, 1), bos), ids[:, :-1]], axis=1)

        total = None
        n_pred = b * t
        for direction, gold in (("fwd", fwd_gold), ("bwd", bwd_gold)):
            _, h2 = self._run_direction(x_seq, direction, train_rng)
            states = ad.stack_time(h2)  # (B, T, proj)
            logits = states @ self.softmax_w + self.softmax_b
            logp = ad.log_softmax(logits, axis=-1)
            gold_lp = ad.take_along(logp, gold[:, :, None], axis=2)
            s = gold_lp.sum()
            total = s if total is None else total + s
        return total * (-1.0 / (2.0 * n_pred))

    def perplexity(self, tokens: Sequence[str]) -> float:
        """exp(mean per-prediction NLL), averaged over both directions."""
        tokens = list(tokens)
        if not tokens:
            raise CorpusError("cannot compute perplexity of an empty stream")
        windows = chunk_windows(tokens, self.config.unroll_steps)
        with ad.no_grad():
            total = 0.0
            n = 0
            for win in windows:
                total += float(self.window_loss([win]).data) * len(win)
                n += len(win)
        return float(np.exp(total / n))


def chunk_windows(tokens: list[str], unroll: int) -> list[list[str]]:
    """Consecutive windows of the unroll length. A shorter final window is
    kept: even a single token predicts its boundary symbols."""
    return [tokens[i : i + unroll] for i in range(0, len(tokens), unroll)]


def bilm_forward(lm: BiLM, tokens: Sequence[str]) -> list[LayeredEmbedding]:
    return lm.sentence_layers(tokens)
