"""Exception hierarchy shared across the toolkit.

Data-content problems (bad rows, bad references, incomplete grids) derive
from :class:`DataError` so callers can distinguish them from usage errors,
which are plain ``ValueError`` / :class:`ConfigError`.
"""

from __future__ import annotations


class DataError(ValueError):
    """A problem with the *content* of an input file or record set."""


class ParseError(DataError):
    """A row or line could not be parsed at all (wrong shape, bad JSON)."""


class SchemaError(DataError):
    """A parsed value violates the declared schema (bad label, missing field)."""


class EmptyInputError(DataError):
    """An input file contains no data rows."""


class ReferentialError(DataError):
    """A prediction references an example id that does not exist in the split."""


class DuplicateRecordError(DataError):
    """The same (model_id, example_id) cell appears more than once."""


class ConsistencyError(DataError):
    """A record's label disagrees with the argmax of its own logits."""


class CompletenessError(DataError):
    """The model x example prediction grid has at least one missing cell."""


class ConfigError(ValueError):
    """An experiment configuration is invalid (maps to CLI exit status 2)."""
