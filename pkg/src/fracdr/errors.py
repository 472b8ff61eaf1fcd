"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class AccuracyError(ArithmeticError):
    """A numerical procedure could not meet its stated accuracy target."""


class NotInvariantError(ValueError):
    """The operator does not leave the candidate space invariant."""


class AmbiguousBasisError(ValueError):
    """Two basis functions share the same term key."""


class SchemaError(DomainError):
    """Malformed JSON input; ``pointer`` is the JSON pointer of the offending field."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
