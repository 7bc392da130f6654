"""Exception taxonomy shared across the package.

CLI exit codes map onto these: usage errors exit 1, FormatError exits 2,
InvariantError exits 3.
"""


class BlinqsError(Exception):
    """Base class for all package-specific errors."""


class FormatError(BlinqsError):
    """Malformed or unsupported input: bad magic, truncated stream, bad image."""


class DegenerateStreamError(FormatError):
    """Stream whose statistics cannot drive the transcoder (e.g. zero length)."""


class InvariantError(BlinqsError):
    """An internal consistency check failed; indicates a bug, not bad input."""
