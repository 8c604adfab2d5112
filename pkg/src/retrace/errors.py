"""Exception taxonomy shared across the package.

The split mirrors the CLI exit codes: bad or unreadable inputs (including
hash mismatches) are InputError, broken domain constraints are
ValidationError.
"""


class RetraceError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RetraceError):
    """Unreadable, malformed, or unresolvable input data or configuration."""


class IntegrityError(InputError):
    """Content hash did not verify; the artifact may have been altered."""


class ValidationError(RetraceError):
    """A domain invariant or relation constraint was violated."""
