"""Exception taxonomy shared across the package.

Each failure class maps to one CLI exit code and one HTTP error code, so
callers can branch on the type rather than on message text.
"""

from __future__ import annotations


class AhpError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class StructureError(AhpError):
    """Structurally unusable input: non-square entries, bad sizes, bad labels."""

    code = "structure"


class ValidationError(AhpError):
    """Invariant violations on otherwise well-formed data.

    Carries per-cell diagnostics so callers (CLI, HTTP service, UI) can point
    at the offending judgment.
    """

    code = "validation"

    def __init__(self, message, violations=(), matrix=None, member=None):
        super().__init__(message)
        self.violations = tuple(violations)
        self.matrix = matrix
        self.member = member

    def details(self):
        out = []
        for v in self.violations:
            out.append(
                {
                    "row": v.row,
                    "col": v.col,
                    "code": v.code,
                    "message": v.message,
                    "matrix": self.matrix,
                }
            )
        return out


class DomainError(AhpError):
    """Arguments outside the defined domain (empty groups, bad counts, ...)."""

    code = "domain"


class NumericalError(AhpError):
    """A numerical procedure failed to converge; never silently masked."""

    code = "numerical"

    def __init__(self, message, iterations=None):
        super().__init__(message)
        self.iterations = iterations


class ProtocolError(AhpError):
    """An operation arrived out of protocol order for the session.

    `missing` lists members whose submissions are still outstanding when that
    is the reason the operation was refused.
    """

    code = "protocol-order"

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class MalformedDocumentError(AhpError):
    """Text that is not a well-formed document: bad JSON, bad rationals, bad shape."""

    code = "malformed"


class MigrationNeededError(AhpError):
    """Well-formed document with a format version this build does not speak."""

    code = "migration-needed"
