"""Exception hierarchy shared by every pipeline stage."""


class QmdgenError(Exception):
    """Base class for all errors raised by this package."""


# model ingest


class ModelError(QmdgenError):
    pass


class MalformedInput(ModelError):
    pass


class UnsupportedElement(ModelError):
    pass


class DanglingReference(ModelError):
    pass


# retrieval


class RetrievalError(QmdgenError):
    pass


class EmptyCorpus(RetrievalError):
    pass


class EmptyQuery(RetrievalError):
    pass


class IndexFormatError(RetrievalError):
    pass


# prompts


class EmptyModelText(QmdgenError):
    pass


# llm gateway


class LLMError(QmdgenError):
    pass


class MissingCredentials(LLMError):
    pass


class ProviderError(LLMError):
    def __init__(self, message, status=None, body=None):
        super().__init__(message)
        self.status = status
        self.body = body


class Timeout(LLMError):
    pass


# metrics


class MetricError(QmdgenError):
    pass


class EmptyHypothesis(MetricError):
    pass


class EmptyReference(MetricError):
    pass


class EmptyRows(MetricError):
    pass


# experiment / config


class ConfigInvalid(QmdgenError):
    pass
