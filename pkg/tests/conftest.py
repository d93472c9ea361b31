import numpy as np
import pytest

from crosslab.bilm import LMConfig


def tiny_lm_config(**overrides) -> LMConfig:
    base = dict(
        char_dim=4,
        conv_layers=((1, 3), (2, 4)),
        lstm_size=8,
        proj_size=5,
        max_chars=8,
        unroll_steps=6,
        batch_size=8,
        epochs=3,
        dropout=0.0,
        seed=7,
    )
    base.update(overrides)
    return LMConfig(**base)


@pytest.fixture
def lm_config():
    return tiny_lm_config()


def toy_stream(n_tokens: int, seed: int = 0, vocab_size: int = 12) -> list[str]:
    """A Markov-ish toy token stream with a predictable bigram structure."""
    rng = np.random.default_rng(seed)
    words = [f"w{i}" for i in range(vocab_size)]
    out = []
    state = 0
    for _ in range(n_tokens):
        out.append(words[state])
        if rng.random() < 0.8:
            state = (state + 1) % vocab_size
        else:
            state = int(rng.integers(0, vocab_size))
    return out
