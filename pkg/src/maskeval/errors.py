"""Exception types shared across the toolkit."""

from __future__ import annotations


class MaskEvalError(Exception):
    """Base class for all toolkit errors."""


class ParseError(MaskEvalError):
    """A file could not be parsed at the syntactic level."""

    def __init__(self, message: str, path: str | None = None, position: int | None = None):
        self.path = path
        self.position = position
        detail = message
        if path is not None:
            detail += f" (file: {path}"
            detail += f", position: {position})" if position is not None else ")"
        super().__init__(detail)


class SchemaError(MaskEvalError):
    """A parsed file is missing a required field or holds an invalid value."""

    def __init__(self, message: str, field_path: str | None = None):
        self.field_path = field_path
        if field_path is not None:
            message += f" (at {field_path})"
        super().__init__(message)


class MentionOutsideText(MaskEvalError):
    """A mention's character offsets fall outside the document text."""


class EmptyMention(MaskEvalError):
    """A mention span covers only whitespace and maps to no token."""


class MissingMask(MaskEvalError):
    """An evaluable document has no entry in the system-mask set."""

    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"no system mask provided for document {doc_id!r}")


class IcUnavailable(MaskEvalError):
    """An information-content provider cannot weight a required token."""


class MissingEntry(IcUnavailable):
    """An externally loaded weight table has no entry for a queried token."""


class ProbabilityOutOfRange(MaskEvalError):
    """A probability read from an exchange file lies outside [0, 1]."""


class GazetteerLoadError(MaskEvalError):
    """A gazetteer file could not be read."""


class OverlappingSpans(MaskEvalError):
    """Mask spans overlap after resolution; replacement would be ambiguous."""


class FewerThanTwoAnnotators(MaskEvalError):
    """Agreement statistics need at least two annotators."""


class NoComparableItems(MaskEvalError):
    """No item carries labels from two or more annotators."""


class TokenizerMismatch(MaskEvalError):
    """A token-indexed file was produced under a different tokenizer version."""

    def __init__(self, expected: str, found: str):
        self.expected = expected
        self.found = found
        super().__init__(
            f"tokenizer fingerprint mismatch: expected {expected}, file carries {found}"
        )
