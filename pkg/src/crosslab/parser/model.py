"""Graph-based biaffine dependency parser.

Input is word representations only (a trainable scalar mix of the three LM
layers, or frozen word vectors replicated across layers); there is no
part-of-speech pathway. A learned root vector is prepended, a stacked
BiLSTM encodes the sentence, and two MLP heads feed biaffine scorers:

    arc(h, d)      = H_h^T U_arc D_d + b_arc . H_h
    label_r(h, d)  = LH_h^T U_r LD_d + u_r . LH_h + c_r

with one bilinear form per relation r.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor
from ..errors import ConfigError, NumericsError
from ..mix import ScalarMix
from ..rand import make_rng

NEG = -1e30  # additive mask for impossible arcs (self loops, padding)


@dataclass
class ParserConfig:
    lstm_size: int = 100
    lstm_layers: int = 3
    arc_mlp: int = 125
    label_mlp: int = 25
    input_dropout: float = 0.3
    lstm_dropout: float = 0.3
    batch_size: int = 80
    epochs: int = 80
    patience: int = 50
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    seed: int = 0
    dev_decode: str = "greedy"  # decoding used for epoch-level dev scores

    def __post_init__(self):
        if self.dev_decode not in ("greedy", "mst"):
            raise ConfigError(f"unknown dev_decode {self.dev_decode!r}")
        if self.batch_size < 2 or self.batch_size % 2:
            raise ConfigError("batch_size must be even and >= 2")

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "ParserConfig":
        return cls(**d)


class ParserModel:
    def __init__(self, config: ParserConfig, labels: tuple[str, ...],
                 input_dim: int, rng: np.random.Generator | None = None):
        from ..bilm.lstm import LSTMCell  # plain cells, no projection

        if rng is None:
            rng = make_rng(config.seed)
        if not labels:
            raise ConfigError("empty label inventory")
        self.config = config
        self.labels = tuple(labels)
        self.label_index = {l: i for i, l in enumerate(self.labels)}
        self.input_dim = input_dim

        self.mix = ScalarMix(prefix="parser.mix")
        self.root_vec = ad.parameter(rng.normal(0.0, 0.1, size=input_dim), "parser.root")

        self.cells: dict[tuple[str, int], "LSTMCell"] = {}
        for layer in range(config.lstm_layers):
            in_dim = input_dim if layer == 0 else 2 * config.lstm_size
            for d in ("fwd", "bwd"):
                self.cells[(d, layer)] = LSTMCell(
                    in_dim, config.lstm_size, None, rng, prefix=f"parser.lstm.{d}{layer}")

        state_dim = 2 * config.lstm_size
        a, l, n_lab = config.arc_mlp, config.label_mlp, len(self.labels)

        def lin(name, rows, cols):
            return ad.parameter(rng.normal(0.0, np.sqrt(1.0 / rows), size=(rows, cols)),
                                f"parser.{name}")

        self.arc_head_w = lin("arc_head.w", state_dim, a)
        self.arc_head_b = ad.parameter(np.zeros(a), "parser.arc_head.b")
        self.arc_dep_w = lin("arc_dep.w", state_dim, a)
        self.arc_dep_b = ad.parameter(np.zeros(a), "parser.arc_dep.b")
        self.label_head_w = lin("label_head.w", state_dim, l)
        self.label_head_b = ad.parameter(np.zeros(l), "parser.label_head.b")
        self.label_dep_w = lin("label_dep.w", state_dim, l)
        self.label_dep_b = ad.parameter(np.zeros(l), "parser.label_dep.b")

        self.u_arc = lin("u_arc", a, a)
        self.b_arc = ad.parameter(np.zeros((a, 1)), "parser.b_arc")
        # one bilinear form per relation, stored as (l, n_lab * l)
        self.label_bilinear = lin("label_bilinear", l, n_lab * l)
        self.label_head_bias = lin("label_head_bias", l, n_lab)
        self.label_bias = ad.parameter(np.zeros(n_lab), "parser.label_bias")

    def parameters(self) -> dict[str, Tensor]:
        out = dict(self.mix.parameters())
        out["parser.root"] = self.root_vec
        for key in sorted(self.cells):
            out.update(self.cells[key].parameters())
        for t in (self.arc_head_w, self.arc_head_b, self.arc_dep_w, self.arc_dep_b,
                  self.label_head_w, self.label_head_b, self.label_dep_w,
                  self.label_dep_b, self.u_arc, self.b_arc, self.label_bilinear,
                  self.label_head_bias, self.label_bias):
            out[t.name] = t
        return out

    # -- encoding --------------------------------------------------------------

    def _bilstm(self, x: Tensor, mask: np.ndarray | None = None,
                train_rng: np.random.Generator | None = None) -> Tensor:
        """(B, T, d_in) -> (B, T, 2*lstm). Padded positions (mask 0) freeze
        the recurrent state so batching never changes a sentence's states."""
        b, t, _ = x.shape
        states = x
        for layer in range(self.config.lstm_layers):
            if train_rng is not None and layer > 0 and self.config.lstm_dropout > 0:
                states = ad.dropout(states, self.config.lstm_dropout, train_rng)
            halves = []
            for d in ("fwd", "bwd"):
                cell = self.cells[(d, layer)]
                fused = cell.fused()
                h, c = cell.zero_state(b)
                outs: list[Tensor | None] = [None] * t
                order = range(t) if d == "fwd" else range(t - 1, -1, -1)
                for j in order:
                    h_new, c_new = cell.step(states[:, j, :], h, c, fused)
                    if mask is not None:
                        m = mask[:, j : j + 1]
                        h = h_new * m + h * (1.0 - m)
                        c = c_new * m + c * (1.0 - m)
                    else:
                        h, c = h_new, c_new
                    outs[j] = h
                halves.append(ad.stack_time(outs))  # (B, T, lstm)
            states = ad.concat(halves, axis=2)
        return states

    def encode(self, layer_stack: Tensor, mask: np.ndarray | None = None,
               train_rng: np.random.Generator | None = None) -> Tensor:
        """Mix LM layers, prepend the learned root vector, run the BiLSTM.

        layer_stack: (3, B, T, input_dim). Returns (B, T+1, 2*lstm) with the
        root state at position 0. Deterministic when train_rng is None.
        """
        if layer_stack.shape[0] != 3 or layer_stack.shape[3] != self.input_dim:
            raise NumericsError(f"bad layer stack shape {layer_stack.shape}")
        b = layer_stack.shape[1]
        mixed = self.mix.combine(layer_stack)  # (B, T, d)
        if train_rng is not None and self.config.input_dropout > 0:
            mixed = ad.dropout(mixed, self.config.input_dropout, train_rng)
        root = ad.reshape(self.root_vec, (1, 1, self.input_dim))
        root_tiled = root * np.ones((b, 1, 1))
        x = ad.concat([root_tiled, mixed], axis=1)  # (B, T+1, d)
        full_mask = None
        if mask is not None:
            full_mask = np.concatenate([np.ones((b, 1)), mask], axis=1)
        return self._bilstm(x, full_mask, train_rng)

    # -- scoring ---------------------------------------------------------------

    def _arc_mlps(self, states: Tensor) -> tuple[Tensor, Tensor]:
        heads = ad.relu(states @ self.arc_head_w + self.arc_head_b)
        deps = ad.relu(states @ self.arc_dep_w + self.arc_dep_b)
        return heads, deps

    def _label_mlps(self, states: Tensor) -> tuple[Tensor, Tensor]:
        heads = ad.relu(states @ self.label_head_w + self.label_head_b)
        deps = ad.relu(states @ self.label_dep_w + self.label_dep_b)
        return heads, deps

    def arc_score_matrix(self, states: Tensor) -> Tensor:
        """(B, T+1, 2l) -> (B, T+1, T) arc scores: row = head position
        (0 = root), column = dependent token."""
        h, d = self._arc_mlps(states)
        d_tok = d[:, 1:, :]                                   # (B, T, a)
        bilinear = (h @ self.u_arc) @ ad.swapaxes(d_tok, 1, 2)  # (B, T+1, T)
        head_bias = h @ self.b_arc                            # (B, T+1, 1)
        return bilinear + head_bias

    def label_scores_at(self, states: Tensor, head_idx: np.ndarray) -> Tensor:
        """Label scores for each token's arc to a chosen head.

        states (B, T+1, 2l), head_idx (B, T) of head positions. Returns
        (B, T, n_labels).
        """
        lh_all, ld_all = self._label_mlps(states)
        l = self.config.label_mlp
        idx = np.repeat(head_idx[:, :, None], l, axis=2)
        lh = ad.take_along(lh_all, idx, axis=1)               # (B, T, l)
        ld = ld_all[:, 1:, :]                                 # (B, T, l)
        b, t = head_idx.shape
        n_lab = len(self.labels)
        tmp = lh @ self.label_bilinear                        # (B, T, n_lab*l)
        tmp = ad.reshape(tmp, (b, t, n_lab, l))
        bilinear = ad.tsum(tmp * ad.reshape(ld, (b, t, 1, l)), axis=3)
        return bilinear + lh @ self.label_head_bias + self.label_bias
