"""Exception hierarchy shared by every shuffleload module."""


class ShuffleLoadError(ValueError):
    """Base class for all domain errors raised by this package."""


class EmptyInput(ShuffleLoadError):
    pass


class InconsistentDimension(ShuffleLoadError):
    pass


class DimensionMismatch(ShuffleLoadError):
    pass


class InsufficientData(ShuffleLoadError):
    pass


class RankDeficient(ShuffleLoadError):
    pass


class ParseError(ShuffleLoadError):
    """Malformed input document; carries the offending line and field when known."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class VersionMismatch(ShuffleLoadError):
    pass


class LengthMismatch(ShuffleLoadError):
    pass


class ZeroActual(ShuffleLoadError):
    pass


class DegenerateActuals(ShuffleLoadError):
    pass


class InvalidConfig(ShuffleLoadError):
    pass


class ExhaustedSpace(ShuffleLoadError):
    pass


class NegativeValue(ParseError):
    pass


class MissingHeader(ParseError):
    pass


class UnknownInterface(ShuffleLoadError):
    pass


class NonMonotonicTimestamps(ShuffleLoadError):
    pass


class WindowOutOfRange(ShuffleLoadError):
    pass


class TooFewSamples(ShuffleLoadError):
    pass


class MixedInputSize(ShuffleLoadError):
    pass
