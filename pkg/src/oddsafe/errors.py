"""Exception hierarchy shared across the toolkit."""


class OddsafeError(Exception):
    """Base class for all toolkit errors."""


class InvalidOddError(OddsafeError):
    """The ODD attribute declaration is unusable (empty, duplicate names, ...)."""


class NotFoundError(OddsafeError):
    """A referenced situation, failure, label or controller does not exist."""


class ModelError(OddsafeError):
    """An augmented SCG or DTMC violates its structural invariants."""


class PropertyError(OddsafeError):
    """Base class for property-language errors."""


class PropertySyntaxError(PropertyError):
    """Syntax error in a property expression; `column` is 1-based."""

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} (column {column})")
        self.column = column


class PropertyRangeError(PropertyError):
    """A parsed property value is outside its legal range."""


class SchemaError(OddsafeError):
    """A serialised document does not match its schema; `paths` lists offenders."""

    def __init__(self, message: str, paths=None):
        self.paths = list(paths or [])
        detail = f" [{', '.join(self.paths)}]" if self.paths else ""
        super().__init__(message + detail)


class TraceError(OddsafeError):
    """A trace event is malformed, out of order or references unknown ids."""
