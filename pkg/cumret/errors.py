"""Exception types for cumret."""


class CumretError(Exception):
    """Base class for all cumret errors."""


class ArgumentError(CumretError, ValueError):
    """A precondition on an operation's arguments was violated."""


class DataValidationError(CumretError, ValueError):
    """Input market data is unusable.

    Carries every fatal message found so the caller can report them together.
    """

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "invalid data")


class UndefinedValueError(CumretError, IndexError):
    """An indicator value was read inside its warm-up region."""


class FixtureIntegrityError(CumretError):
    """A bundled data fixture does not match its embedded checksum."""
