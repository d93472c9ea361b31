"""Exception hierarchy shared across the package."""


class CrosslabError(Exception):
    """Base class for all errors raised by this package."""


class CorpusError(CrosslabError):
    """Malformed or inconsistent input data (treebanks, dictionaries, vectors)."""


class NumericsError(CrosslabError):
    """Invalid numerical input or failed numerical precondition."""


class ConfigError(CrosslabError):
    """Invalid configuration or command-line usage."""
