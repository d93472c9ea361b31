from .charcnn import CharCNN, char_cnn_encode
from .config import LMConfig
from .lstm import LSTMCell, lstm_step
from .model import BiLM, bilm_forward, chunk_windows
from .train import TrainedLM, perplexity, train_lm

__all__ = [
    "BiLM", "CharCNN", "LMConfig", "LSTMCell", "TrainedLM",
    "bilm_forward", "char_cnn_encode", "chunk_windows", "lstm_step",
    "perplexity", "train_lm",
]
