"""Error types shared across the package.

The command-line front end maps these onto distinct exit codes, so the
classes below are the only exceptions deliberately raised by library code.
"""


class SkgsError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(SkgsError, ValueError):
    """Invalid arguments, configuration, or preconditions."""


class NumericalError(SkgsError, RuntimeError):
    """A solve or iteration failed to converge or lost stability."""


class ArtifactError(SkgsError, OSError):
    """An output artifact could not be written or read back."""
