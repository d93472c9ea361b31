"""Language model configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError


@dataclass
class LMConfig:
    """Character-CNN + two-layer bidirectional LSTM language model.

    Defaults are the desk-scale setting: the full-scale layout shrunk while
    preserving the shape relationships (conv widths 1..4, hidden size 4x the
    projection, shared projection/input width).
    """

    char_dim: int = 16
    conv_layers: tuple[tuple[int, int], ...] = ((1, 8), (2, 8), (3, 16), (4, 32))
    lstm_size: int = 128
    proj_size: int = 32
    max_chars: int = 16
    skip_connections: bool = True
    decontext_layer_skip: bool = True  # mirror contextual wiring in decontext mode
    dropout: float = 0.1

    batch_size: int = 128
    unroll_steps: int = 20
    epochs: int = 10
    learning_rate: float = 0.2
    adagrad_accumulator: float = 1.0
    min_count: int = 1
    seed: int = 0

    def __post_init__(self):
        self.conv_layers = tuple((int(w), int(f)) for w, f in self.conv_layers)
        widest = max(w for w, _ in self.conv_layers)
        if self.max_chars < widest:
            raise ConfigError(
                f"max_chars={self.max_chars} shorter than widest conv window {widest}")
        if self.unroll_steps < 2:
            raise ConfigError("unroll_steps must be >= 2 (need at least one prediction)")
        for name in ("char_dim", "lstm_size", "proj_size", "batch_size", "epochs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")

    @property
    def n_filters(self) -> int:
        return sum(f for _, f in self.conv_layers)

    @property
    def layer_dim(self) -> int:
        """Width of each emitted layer: forward and backward halves."""
        return 2 * self.proj_size

    def to_dict(self) -> dict:
        return {
            "char_dim": self.char_dim,
            "conv_layers": [list(x) for x in self.conv_layers],
            "lstm_size": self.lstm_size,
            "proj_size": self.proj_size,
            "max_chars": self.max_chars,
            "skip_connections": self.skip_connections,
            "decontext_layer_skip": self.decontext_layer_skip,
            "dropout": self.dropout,
            "batch_size": self.batch_size,
            "unroll_steps": self.unroll_steps,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "adagrad_accumulator": self.adagrad_accumulator,
            "min_count": self.min_count,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LMConfig":
        d = dict(d)
        if "conv_layers" in d:
            d["conv_layers"] = tuple(tuple(x) for x in d["conv_layers"])
        return cls(**d)
