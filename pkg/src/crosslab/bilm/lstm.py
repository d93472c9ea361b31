"""LSTM cell with per-gate parameters and an optional output projection.

The step computes

    i = sigmoid(W_i x + U_i h_prev + b_i)
    f = sigmoid(W_f x + U_f h_prev + b_f)
    c~ = tanh(W_c x + U_c h_prev + b_c)
    o = sigmoid(W_o x + U_o h_prev + b_o)
    c = f * c_prev + i * c~
    h = o * tanh(c)

and, when configured, projects h before it is exposed or recurred.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Tensor

GATES = ("i", "f", "c", "o")


class LSTMCell:
    def __init__(self, input_dim: int, hidden_dim: int, proj_dim: int | None,
                 rng: np.random.Generator, prefix: str = "lstm"):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.proj_dim = proj_dim
        self.prefix = prefix
        state = proj_dim if proj_dim is not None else hidden_dim
        self.state_dim = state
        sx = np.sqrt(1.0 / input_dim)
        sh = np.sqrt(1.0 / state)
        self.w = {g: ad.parameter(rng.normal(0.0, sx, size=(input_dim, hidden_dim)),
                                  f"{prefix}.w_{g}") for g in GATES}
        self.u = {g: ad.parameter(rng.normal(0.0, sh, size=(state, hidden_dim)),
                                  f"{prefix}.u_{g}") for g in GATES}
        self.b = {g: ad.parameter(np.zeros(hidden_dim), f"{prefix}.b_{g}") for g in GATES}
        if proj_dim is not None:
            self.proj = ad.parameter(
                rng.normal(0.0, np.sqrt(1.0 / hidden_dim), size=(hidden_dim, proj_dim)),
                f"{prefix}.proj")
        else:
            self.proj = None

    def parameters(self) -> dict[str, Tensor]:
        out = {}
        for g in GATES:
            out[f"{self.prefix}.w_{g}"] = self.w[g]
            out[f"{self.prefix}.u_{g}"] = self.u[g]
            out[f"{self.prefix}.b_{g}"] = self.b[g]
        if self.proj is not None:
            out[f"{self.prefix}.proj"] = self.proj
        return out

    def fused(self) -> tuple[Tensor, Tensor, Tensor]:
        """Gate weights concatenated once per sequence so each timestep is a
        single matmul per operand."""
        w = ad.concat([self.w[g] for g in GATES], axis=1)
        u = ad.concat([self.u[g] for g in GATES], axis=1)
        b = ad.concat([self.b[g] for g in GATES], axis=0)
        return w, u, b

    def zero_state(self, batch: int) -> tuple[Tensor, Tensor]:
        return (ad.Tensor(np.zeros((batch, self.state_dim))),
                ad.Tensor(np.zeros((batch, self.hidden_dim))))

    def step(self, x: Tensor, h_prev: Tensor, c_prev: Tensor,
             fused: tuple[Tensor, Tensor, Tensor] | None = None) -> tuple[Tensor, Tensor]:
        if fused is None:
            fused = self.fused()
        w, u, b = fused
        hd = self.hidden_dim
        gates = x @ w + h_prev @ u + b
        i = ad.sigmoid(gates[:, 0 * hd : 1 * hd])
        f = ad.sigmoid(gates[:, 1 * hd : 2 * hd])
        c_tilde = ad.tanh(gates[:, 2 * hd : 3 * hd])
        o = ad.sigmoid(gates[:, 3 * hd : 4 * hd])
        c = f * c_prev + i * c_tilde
        h = o * ad.tanh(c)
        if self.proj is not None:
            h = h @ self.proj
        return h, c


def lstm_step(x, h_prev, c_prev, cell: LSTMCell) -> tuple[Tensor, Tensor]:
    """One cell step over a (batch, dim) input; arrays are wrapped as
    constants."""
    return cell.step(ad.as_tensor(x), ad.as_tensor(h_prev), ad.as_tensor(c_prev))
