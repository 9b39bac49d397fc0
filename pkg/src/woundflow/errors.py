"""Exception hierarchy shared across the package."""


class WoundflowError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(WoundflowError):
    """Two array shapes that must be compatible are not.

    Carries both shapes so callers can report them without re-deriving.
    """

    def __init__(self, message: str, expected=None, actual=None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class NonFiniteError(WoundflowError):
    """A tensor that must be finite contains NaN or infinity."""

    def __init__(self, message: str, tensor_name: str | None = None):
        super().__init__(message)
        self.tensor_name = tensor_name


class ConfigError(WoundflowError):
    """Invalid configuration. ``problems`` lists every offending key at once."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


class SchemaMismatchError(WoundflowError):
    """A stored artifact was built against a different schema version."""


class ManifestError(WoundflowError):
    """A dataset manifest failed validation."""


class UnsupportedModeError(WoundflowError):
    """The requested operation is not available for this model mode."""


class LeakageError(WoundflowError):
    """Test-partition samples were touched by a training-side computation."""
