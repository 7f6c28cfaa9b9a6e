"""Exception types shared across the package.

The CLI maps these onto its exit codes: ConfigError -> 1 (input/IO),
ValidationFailure -> 2, NumericalError -> 3.
"""

from __future__ import annotations


class QudiffError(Exception):
    """Base class for package errors."""


class ConfigError(QudiffError):
    """Unreadable, unparseable, or schema-violating configuration input."""


class ValidationFailure(QudiffError):
    """Physically invalid parameters or a failed validation gate."""


class NumericalError(QudiffError):
    """A numeric routine could not meet its accuracy or range contract."""


class UnstableDriftError(NumericalError):
    """An operation requiring a stable drift matrix was given an unstable one."""
