"""Shared exception types."""

from __future__ import annotations


class NavsiftError(Exception):
    """Base class for all package errors."""


class EmptyInputError(NavsiftError):
    """Raised when an input source yields zero usable rows."""


class DomainNotFoundError(NavsiftError):
    """Raised when a domain is absent from a graph or store."""


class LabelParseError(NavsiftError):
    """Raised on malformed label rows; carries file and line context."""

    def __init__(self, message: str, path: str = "", line: int = 0):
        super().__init__(message)
        self.path = path
        self.line = line


class LabelConflictError(NavsiftError):
    """Raised when a review verdict contradicts an existing label."""


class SchemaMismatchError(NavsiftError):
    """Raised when a model and a feature matrix disagree on schema."""


class FeatureExtractionError(NavsiftError):
    """Raised when matrix extraction hits unknown domains.

    Carries the missing domains and the partial matrix built from the
    rows that did resolve, so callers can report or recover.
    """

    def __init__(self, missing, partial=None):
        super().__init__(f"{len(missing)} domain(s) not in graph: {sorted(missing)[:5]}")
        self.missing = tuple(sorted(missing))
        self.partial = partial
