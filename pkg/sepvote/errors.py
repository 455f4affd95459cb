"""Exception hierarchy for sepvote.

Every error raised on purpose by the package derives from `SepvoteError`. The CLI maps the
`exit_code` of an uncaught error to the process exit status.
"""


class SepvoteError(Exception):
    """Base class for all sepvote errors."""

    exit_code: int = 3


class UsageError(SepvoteError):
    """The caller supplied an invalid option, flag, or configuration value."""

    exit_code = 1


class ConfigError(UsageError, ValueError):
    """A training configuration file or override is invalid."""


class DataError(SepvoteError):
    """Input data (manifests, images, checkpoints) is missing or malformed."""

    exit_code = 2


class ShapeError(SepvoteError, ValueError):
    """Tensor shapes or parameters do not satisfy an operation's contract."""

    exit_code = 2


class InvariantError(SepvoteError):
    """An internal invariant was violated."""

    exit_code = 3


class ManifestError(DataError, ValueError):
    """Base class for manifest problems.

    Attributes:
        line: 1-based manifest line the problem was found on, if any.
    """

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ManifestNotFoundError(ManifestError, FileNotFoundError):
    """The manifest file does not exist."""


class ManifestLabelError(ManifestError):
    """A manifest line carries a label outside {0, 1}."""


class DuplicateEntryError(ManifestError):
    """The same image path appears on more than one manifest line."""


class ImageDecodeError(DataError, ValueError):
    """An image file is truncated or in an unsupported format."""


class CheckpointError(DataError, ValueError):
    """Base class for checkpoint read/write problems.

    Attributes:
        code: Short machine-readable identifier of the failure kind.
    """

    code: str = "checkpoint"


class MalformedCheckpointError(CheckpointError):
    """The checkpoint header or magic bytes cannot be parsed."""

    code = "malformed"

    def __init__(self, detail: str) -> None:
        super().__init__(f"malformed checkpoint: {detail}")


class TruncatedCheckpointError(CheckpointError):
    """The checkpoint payload is shorter than its directory declares."""

    code = "truncated"


class CheckpointVersionError(CheckpointError):
    """The checkpoint was written with an unsupported format version."""

    code = "version"


class SchemeMismatchError(CheckpointError):
    """The checkpoint's segmentation scheme differs from the requested one."""

    code = "scheme_mismatch"

    def __init__(self, expected: str, found: str) -> None:
        super().__init__(f"scheme mismatch: expected '{expected}', checkpoint has '{found}'")
        self.expected = expected
        self.found = found


class ShapeMismatchError(CheckpointError):
    """A stored tensor does not match the shape of the model parameter it restores."""

    code = "shape_mismatch"
