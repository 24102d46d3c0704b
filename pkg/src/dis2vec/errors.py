"""Exception hierarchy shared by all pipeline stages."""


class Dis2VecError(Exception):
    """Base class for all errors raised by this package."""


class DataError(Dis2VecError):
    """Input data is unusable (CLI exit code 2)."""


class EmptyCorpus(DataError):
    pass


class ParseError(DataError):
    pass


class InvalidCategory(DataError):
    pass


class EmptyVocabulary(DataError):
    pass


class EmptySupport(DataError):
    pass


class InvalidSpec(DataError):
    pass


class ZeroVector(DataError):
    pass


class DiseaseNotInEmbeddings(DataError):
    pass


class NoCandidates(DataError):
    pass


class NonFiniteUpdate(Dis2VecError):
    """Training produced NaN or Inf (CLI exit code 3)."""
