"""Exception hierarchy shared by all ptfree modules."""


class PtfreeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PtfreeError, ValueError):
    """An index or component lies outside its admissible range."""


class ContractError(PtfreeError, ValueError):
    """Arguments are individually valid but inconsistent with each other."""


class SingularityError(PtfreeError, ArithmeticError):
    """The Weingarten system is not invertible (dimension smaller than order)."""


class CapacityError(PtfreeError, RuntimeError):
    """A computation would exceed a configured size or time budget."""


class ParseError(PtfreeError, ValueError):
    """Malformed word, pattern or spec string.

    ``position`` is the 0-based column where parsing failed.
    """

    def __init__(self, message, text=None, position=None):
        self.text = text
        self.position = position
        if text is not None and position is not None:
            message = f"{message} at column {position}\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class ConfigError(PtfreeError, ValueError):
    """Invalid experiment configuration; ``field`` names the offending option."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
