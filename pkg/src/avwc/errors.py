"""Exception types shared across the package."""


class AvwcError(Exception):
    """Base class for all errors raised by this package."""


class ResourceLimitError(AvwcError):
    """An enumeration would exceed the configured cap.

    Carries the offending cardinality so callers (and the CLI) can name it.
    """

    def __init__(self, message: str, required: int | None = None, cap: int | None = None):
        super().__init__(message)
        self.required = required
        self.cap = cap


class NumericFailureError(AvwcError):
    """A numerical routine could not certify its result (never silently wrong)."""


class DegenerateRateError(AvwcError, ValueError):
    """Requested code rate is below one message; carries the computed exponent."""

    def __init__(self, message: str, exponent: float | None = None):
        super().__init__(message)
        self.exponent = exponent


class ReductionFailureError(AvwcError):
    """Random-code reduction failed to meet the target after the retry cap."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PrefixSearchFailureError(AvwcError):
    """No feasible prefix code was found for the randomness-elimination step."""


class SpecFormatError(AvwcError):
    """Channel-spec or code-file parse error with source location."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column
