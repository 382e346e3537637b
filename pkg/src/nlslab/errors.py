"""Exception hierarchy shared across the package."""


class NLSError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NLSError, ValueError):
    """Invalid grid, config document, or parameter range."""


class SolverError(NLSError, RuntimeError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class UnsupportedModeError(NLSError, ValueError):
    """Requested an evaluation path that is deliberately not implemented."""


class SnapshotError(NLSError):
    """Base class for snapshot read failures."""


class BadMagicError(SnapshotError):
    pass


class VersionError(SnapshotError):
    pass


class PayloadError(SnapshotError):
    pass


class SerializationError(NLSError, ValueError):
    """Refused to serialize a non-finite value."""
