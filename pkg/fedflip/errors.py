"""Error hierarchy shared by the library and the CLI."""

from typing import Any, Optional


class FedFlipError(Exception):
    """Base error. ``exit_code`` is the CLI process status for this family."""

    exit_code = 3

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context = context
        for key, value in context.items():
            setattr(self, key, value)

    def __str__(self) -> str:
        return self.detail


# Configuration errors (exit 1)

class ConfigError(FedFlipError):
    """Invalid experiment or model configuration."""

    exit_code = 1


class InvalidConfigError(ConfigError):
    """A configuration value violates its constraint."""


class UnknownKeyError(ConfigError):
    """Configuration file names a key nobody reads."""

    def __init__(self, key: str, path: Optional[str] = None):
        where = f" in {path}" if path else ""
        super().__init__(f"Unknown configuration key '{key}'{where}", key=key, path=path)


class ConflictingKeysError(ConfigError):
    """Two keys were given that cannot be combined."""

    def __init__(self, first: str, second: str):
        super().__init__(
            f"Configuration keys '{first}' and '{second}' cannot be used together",
            keys=(first, second),
        )


class AttackConfigError(ConfigError):
    """Attack does not fit the federation it targets."""


class MissingConfigError(ConfigError):
    def __init__(self, path: str):
        super().__init__(f"Configuration file not found: {path}", path=path)


# Data errors (exit 2)

class DataError(FedFlipError):
    """Dataset could not be read or violates its invariants."""

    exit_code = 2


class MissingFileError(DataError):
    def __init__(self, path: str):
        super().__init__(f"File not found: {path}", path=path)


class HeaderError(DataError):
    """CSV header does not match pixel0000..pixelNNNN,label."""


class MalformedRowError(DataError):
    def __init__(self, row: int, expected: int, actual: Optional[int] = None):
        saw = f", saw {actual}" if actual is not None else ""
        super().__init__(
            f"Malformed row {row}: expected {expected} columns{saw}",
            row=row,
            expected=expected,
            actual=actual,
        )


class NonNumericCellError(DataError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(
            f"Non-numeric value {value!r} in row {row}, column {column}",
            row=row,
            column=column,
            value=value,
        )


class LabelRangeError(DataError):
    def __init__(self, row: int, label: Any, num_classes: int):
        super().__init__(
            f"Label {label!r} in row {row} is outside 0..{num_classes - 1}",
            row=row,
            label=label,
            num_classes=num_classes,
        )


class DatasetInvariantError(DataError):
    """In-memory dataset has bad shapes, values or labels."""


class EmptySplitError(DataError):
    """Train/test split would leave one side empty."""


class PartitionError(DataError):
    """Dataset cannot be partitioned across the requested clients."""


# Runtime errors (exit 3)

class ShapeMismatchError(FedFlipError, ValueError):
    def __init__(self, what: str, expected: Any, actual: Any):
        super().__init__(
            f"{what}: expected {expected}, got {actual}",
            what=what,
            expected=expected,
            actual=actual,
        )


class AggregationError(FedFlipError):
    """Local models cannot be averaged."""


class MetricsError(FedFlipError):
    """Predictions and labels cannot be scored."""
