"""Exception taxonomy shared by every evoimage module."""


class EvoImageError(Exception):
    """Base class for all errors raised by evoimage."""


class ImageIOError(EvoImageError):
    """File is missing, unreadable, or unwritable."""


class DecodeError(EvoImageError):
    """File exists but is corrupt or not a supported image format."""


class DimensionError(EvoImageError):
    """Image is too small (or oddly shaped) for the requested operation."""


class DimensionMismatch(EvoImageError):
    """Two-image operation received images of different shapes."""


class UnknownOp(EvoImageError):
    """Transform name is not in the registry."""


class ParamOutOfRange(EvoImageError):
    """Transform parameter is missing, unexpected, or outside its declared range."""


class DegenerateInput(EvoImageError):
    """Statistical fit received all-zero or constant samples."""


class ScorerError(EvoImageError):
    """Base class for external scorer failures."""


class ScorerProcessError(ScorerError):
    """External scorer exited with a nonzero status."""


class ScorerTimeout(ScorerError):
    """External scorer exceeded its configured timeout."""


class ScorerParseError(ScorerError):
    """External scorer output was not a single finite number."""


class ConfigError(EvoImageError):
    """Invalid search or scorer configuration."""


class TraceSyntaxError(EvoImageError):
    """Trace text is not valid JSON or is structurally malformed."""


class VersionMismatch(EvoImageError):
    """Trace format_version is not supported by this build."""


class SourceMismatch(EvoImageError):
    """Replay source image does not hash to the trace's source_hash."""


class ResultMismatch(EvoImageError):
    """Replay output does not hash to the trace's result_hash."""


class EmptyDirError(EvoImageError):
    """Benchmark directory contains no decodable images."""
