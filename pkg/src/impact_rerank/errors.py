"""Exception types shared across the indexing and ranking modules."""


class DuplicateTokenError(ValueError):
    """A vocabulary file lists the same token twice."""


class EmptyVocabularyError(ValueError):
    """A vocabulary file contains no tokens."""


class DuplicatePassageError(ValueError):
    """The same passage id was fed twice to an index builder."""


class NegativeWeightError(ValueError):
    """A term weight below zero reached an impact index builder."""


class CorruptIndexError(RuntimeError):
    """A persisted artifact failed magic/version/length validation."""


class VocabMismatchError(RuntimeError):
    """A persisted artifact was built under a different vocabulary."""


class MissingPassageError(KeyError):
    """A passage id was requested that the index does not contain."""
