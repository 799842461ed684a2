"""Exception hierarchy.

Two families map onto the CLI exit codes: ``InputError`` (exit 2) for bad
files, shapes and arguments, and ``NumericError`` (exit 3) for data that is
well-formed but numerically degenerate.
"""


class FxClusterError(Exception):
    exit_code = 1


class InputError(FxClusterError):
    exit_code = 2


class NumericError(FxClusterError):
    exit_code = 3


class MalformedRow(InputError):
    def __init__(self, line, reason):
        self.line = line
        super().__init__(f"line {line}: {reason}")


class NonPositivePrice(InputError):
    def __init__(self, line, column, value):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"line {line}: non-positive price {value!r} in column {column!r}")


class DuplicateDate(InputError):
    def __init__(self, line, column, date):
        self.line = line
        self.column = column
        self.date = date
        super().__init__(f"line {line}: duplicate date {date} for {column!r}")


class EmptyIntersection(InputError):
    pass


class OrientationUnknown(InputError):
    pass


class SeriesTooShort(InputError):
    pass


class GridMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class LabelMismatch(InputError):
    pass


class InvalidMatrix(InputError):
    pass


class TooFewDates(InputError):
    pass


class NonPositiveBinWidth(InputError):
    pass


class DegenerateSeries(NumericError):
    pass


class UndefinedKL(NumericError):
    pass


class NonPositiveKurtosis(NumericError):
    pass


class DegenerateHeights(NumericError):
    pass


class PipelineError(FxClusterError):
    """A module error re-raised with the pipeline stage that hit it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{stage}] {cause}")
