"""crosslab: a desk-scale crosslingual representation laboratory.

Train character-aware bidirectional LSTM language models (monolingual or
polyglot), distill them into context-free word vectors, align representation
spaces across languages with per-layer linear maps, evaluate lexical
correspondence with CSLS word translation, and train biaffine dependency
parsers under low-resource simulation protocols.
"""

__version__ = "0.1.0"
