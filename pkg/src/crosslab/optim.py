"""Gradient-descent optimizers over autodiff parameters."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor


class Adagrad:
    """Adagrad with a configurable initial accumulator value."""

    def __init__(self, params, lr: float = 0.2, initial_accumulator: float = 1.0):
        self.params = list(params)
        self.lr = lr
        self.acc = [np.full_like(p.data, initial_accumulator) for p in self.params]

    def step(self):
        for p, acc in zip(self.params, self.acc):
            if p.grad is None:
                continue
            acc += p.grad * p.grad
            p.data -= self.lr * p.grad / np.sqrt(acc + 1e-10)

    def zero_grad(self):
        for p in self.params:
            p.grad = None


class Adam:
    def __init__(self, params, lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]
        self.t = 0

    def step(self):
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad * p.grad
            p.data -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.grad = None
