from .embedder import FrozenVectorEmbedder, LMEmbedder
from .metrics import ParseScore, evaluate
from .model import ParserConfig, ParserModel
from .mst import mst_decode
from .scoring import ArcScores, batch_loss, biaffine_scores, parse_loss, parse_sentences
from .train import (TrainedParser, label_inventory, merge_treebanks, parse_treebank,
                    score_treebank, train_parser)

__all__ = [
    "ArcScores", "FrozenVectorEmbedder", "LMEmbedder", "ParseScore", "ParserConfig",
    "ParserModel", "TrainedParser", "batch_loss", "biaffine_scores", "evaluate",
    "label_inventory", "merge_treebanks", "mst_decode", "parse_loss",
    "parse_sentences", "parse_treebank", "score_treebank", "train_parser",
]
