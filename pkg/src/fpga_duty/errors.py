"""Exception hierarchy shared by every module."""


class DutyCycleError(Exception):
    """Base class for all errors raised by this package."""


class InfeasiblePeriod(DutyCycleError):
    """Request period shorter than the item latency of the chosen strategy."""


class SchemaError(DutyCycleError):
    """Malformed input file. ``field`` and ``line`` locate the offending entry."""

    def __init__(self, message, field=None, line=None):
        self.detail = message
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class UnitError(SchemaError):
    """Physically meaningless value, e.g. a negative power or budget."""


class DuplicatePhase(SchemaError):
    pass


class UnknownParams(DutyCycleError):
    """No loading-power entry for a configuration setting and interpolation is off."""


class InconsistentAnchors(DutyCycleError):
    pass


class OutOfRange(DutyCycleError):
    pass
