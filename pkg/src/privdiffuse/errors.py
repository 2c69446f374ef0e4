"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class DomainError(ValueError):
    """A query point lies outside the domain where a quantity is defined."""


class ParseError(ValueError):
    """A text document could not be parsed.

    Carries the offending ``field`` (or line number) when one is known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DisconnectedGraphError(ParameterError):
    """Resistance distances were requested across graph components."""
