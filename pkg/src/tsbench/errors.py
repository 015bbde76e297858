"""Exception hierarchy shared across the harness."""


class BenchmarkError(Exception):
    """Base class for every error raised by tsbench."""


class ValidationError(BenchmarkError, ValueError):
    pass


class NonFiniteError(ValidationError):
    pass


class EmptySeriesError(ValidationError):
    pass


class NonMonotoneTimestampsError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class TooShortError(ValidationError):
    pass


class DegenerateVarianceError(ValidationError):
    """Raised when a computation needs a non-constant input."""


class TooShortAfterDownsampleError(TooShortError):
    pass


class UnivariateError(ValidationError):
    pass


class DegenerateFeaturesError(ValidationError):
    pass


class EmptyCollectionError(ValidationError):
    pass


class HorizonTooLongError(ValidationError):
    pass


class MetricError(BenchmarkError, ValueError):
    pass


class DivisionByZeroError(MetricError):
    def __init__(self, metric: str, detail: str = ""):
        self.metric = metric
        msg = f"{metric}: division by zero"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class MissingTrainSeriesError(MetricError):
    pass


class ForecasterError(BenchmarkError):
    pass


class InsufficientDataError(ForecasterError, ValueError):
    pass


class SingularSystemError(ForecasterError):
    pass


class ShapeMismatchError(ForecasterError, ValueError):
    pass


class NonFiniteOutputError(ForecasterError):
    pass


class UnknownMethodError(BenchmarkError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ConfigError(BenchmarkError):
    """Structured config diagnostic; ``path`` locates the offending key."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SchemaError(ConfigError):
    pass


class InvalidSplitError(ConfigError):
    pass


class ParseError(BenchmarkError, ValueError):
    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class MissingValuesError(ParseError):
    pass


class RaggedRowsError(ParseError):
    pass


class InsufficientDataForPlotError(BenchmarkError, ValueError):
    pass


class EmptyRecordsError(BenchmarkError, ValueError):
    pass
