"""Exception hierarchy for the compositing engine.

Every failure the engine can signal deliberately derives from DcpError so
callers (CLI, pipeline) can distinguish engine errors from programming bugs.
Format errors carry enough context (path, offset, index) to locate the bad
bytes without re-parsing the file.
"""

from __future__ import annotations


class DcpError(Exception):
    """Base class for all engine errors."""


class FormatError(DcpError):
    """A serialized asset violates its file format contract."""


class BadMagicError(FormatError):
    def __init__(self, path: str, found: bytes, expected: bytes) -> None:
        super().__init__(f"{path}: bad magic {found!r}, expected {expected!r}")
        self.path = path
        self.found = found
        self.expected = expected


class UnsupportedVersionError(FormatError):
    def __init__(self, path: str, version: int) -> None:
        super().__init__(f"{path}: unsupported format version {version}")
        self.path = path
        self.version = version


class TruncatedFileError(FormatError):
    def __init__(self, path: str, expected: int, actual: int) -> None:
        super().__init__(
            f"{path}: truncated payload, expected {expected} bytes, found {actual}"
        )
        self.path = path
        self.expected = expected
        self.actual = actual


class NonFiniteValueError(FormatError):
    """A depth or embedding payload contains NaN/Inf; index is row-major."""

    def __init__(self, path: str, index: int) -> None:
        super().__init__(f"{path}: non-finite value at index {index}")
        self.path = path
        self.index = index


class MaskValueError(FormatError):
    """A mask PNG contains a sample that is neither 0 nor 255."""

    def __init__(self, path: str, value: int) -> None:
        super().__init__(f"{path}: mask sample {value} is neither 0 nor 255")
        self.path = path
        self.value = value


class EmptyGridError(DcpError):
    """A grid with zero width or height was supplied."""


class DimensionMismatchError(DcpError):
    """Two grids or vectors that must share dimensions do not."""


class ZeroVectorError(DcpError):
    """An embedding with zero L2 norm cannot be normalized."""


class EmptyMaskError(DcpError):
    """A mask required to have at least one foreground pixel is empty."""


class EmptyForegroundError(DcpError):
    """Extraction produced an empty foreground mask; the asset is skippable."""


class ForegroundTooLargeError(DcpError):
    """The foreground window does not fit inside the background."""


class PlacementInfeasibleError(DcpError):
    """No scale in the sweep allows the foreground to fit."""


class OutOfBoundsPasteError(DcpError):
    """A paste location would place foreground pixels outside the background."""


class ManifestError(DcpError):
    """A dataset or asset manifest is malformed or insufficient."""


class ConfigError(DcpError):
    """A pipeline configuration value violates an operation precondition."""
