"""Detect misinformation domains from browser referrer traffic.

The pipeline: parse referrer logs into monthly traffic records, build one
directed navigation graph per month, extract egonet traffic features for
each domain, train interpretable classifiers on labeled domains, then score
egonet-filtered candidate sets and feed human review verdicts back into the
label store.
"""

__version__ = "0.1.0"

from navsift.errors import (
    DomainNotFoundError,
    EmptyInputError,
    FeatureExtractionError,
    LabelConflictError,
    LabelParseError,
    NavsiftError,
    SchemaMismatchError,
)

__all__ = [
    "__version__",
    "NavsiftError",
    "EmptyInputError",
    "DomainNotFoundError",
    "LabelParseError",
    "LabelConflictError",
    "SchemaMismatchError",
    "FeatureExtractionError",
]
