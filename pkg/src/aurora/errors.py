"""Exception types shared across the toolkit.

Exit-code mapping for the CLI: usage errors exit 1, DataError subclasses
exit 2, RuntimeFailure subclasses exit 3.
"""


class AuroraError(Exception):
    """Base class for all toolkit errors."""


class DataError(AuroraError):
    """Malformed or inconsistent input data."""


class CorpusError(DataError):
    """Corpus CSV parse or validation failure, with row/column context."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class AlreadyCenteredError(DataError):
    """Centering applied twice; almost always a pipeline bug."""


class UnderdeterminedError(DataError):
    """Too few training tokens for the regression design."""


class DegenerateGeometryError(DataError):
    """A landmark configuration without usable extent (coincident points)."""


class ModelFormatError(DataError):
    """Model bundle file is unreadable or has an unrecognized format."""


class LutFormatError(DataError):
    """Base class for lookup-table file problems."""


class LutHeaderError(LutFormatError):
    """Corrupt or unrecognized lookup-table header."""


class LutVersionError(LutFormatError):
    """Lookup-table format version not supported."""


class LutTruncatedError(LutFormatError):
    """Lookup-table payload shorter than the header promises."""


class GridTooLargeError(AuroraError):
    """Requested lookup grid exceeds the cell cap; use a larger step."""


class ConfigError(DataError):
    """Invalid analysis configuration field."""


class RuntimeFailure(AuroraError):
    """Environment problem at run time (device, port, missing file)."""


class AudioDeviceError(RuntimeFailure):
    """Audio capture backend missing or device unavailable."""
