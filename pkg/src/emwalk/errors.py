class ParameterError(ValueError):
    """A model or configuration parameter is outside its admissible range."""


class DomainError(ValueError):
    """An operation was called on an input outside its domain."""


class DimensionError(ValueError):
    """Mismatched structural sizes (vertex counts, vector lengths)."""
