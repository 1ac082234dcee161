"""Domain errors. All derive from ValueError so callers can treat them as input errors."""

from typing import Optional


class D2SInputError(ValueError):
    """Base class for problems with user-supplied files or parameters."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f'line {line}: {message}'
        super().__init__(message)


class OntologyError(D2SInputError):
    """Ontology file violates the format or one of the ontology invariants."""

    def __init__(self, message: str, line: Optional[int] = None, offending: str = ''):
        self.offending = offending
        super().__init__(message, line)


class CorpusFormatError(D2SInputError):
    pass


class ListingFormatError(D2SInputError):
    pass


class LexiconFormatError(D2SInputError):
    pass


class LabelError(D2SInputError):
    """A post lacks the label a task needs, or a split/stratum came out empty."""


class ShapeError(D2SInputError):
    pass


class CheckpointError(D2SInputError):
    pass


class ConfigError(D2SInputError):
    """Run configuration failed validation."""
