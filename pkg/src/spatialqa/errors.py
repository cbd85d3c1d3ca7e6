"""Exception hierarchy shared across the package."""


class SpatialQAError(Exception):
    """Base class for all package errors."""


class LexiconError(SpatialQAError):
    """Relation lexicon is malformed or incomplete."""


class GrammarError(SpatialQAError):
    """Input text does not conform to the controlled grammar."""

    def __init__(self, message, *, sentence=None, position=None):
        super().__init__(message)
        self.sentence = sentence
        self.position = position


class AmbiguityError(SpatialQAError):
    """A definite mention matches several chains and no tie-break applies."""


class ArityError(SpatialQAError):
    """Group cardinality conflicts with the discovered member count."""


class NoMatchError(SpatialQAError):
    """A question mention matches no story entity (the no-prediction case)."""


class ContradictionError(SpatialQAError):
    """A query was issued against a closure that contains a contradiction."""


class CapacityError(SpatialQAError):
    """Derived-fact count exceeded the configured closure bound."""


class ConfigError(SpatialQAError):
    """Generation config is invalid."""


class DataError(SpatialQAError):
    """A data file does not match its expected schema."""
