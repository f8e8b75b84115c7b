"""Exception hierarchy and site-format error codes.

CLI exit codes are documented in the README: configuration errors exit 2,
site validation failures exit 3, file-format errors exit 4, generation
errors exit 5, degenerate-input errors exit 6.
"""

from __future__ import annotations

from enum import Enum


class SurveysimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SurveysimError):
    """Invalid run configuration: bad mode/exemplar pairing, bad flags,
    duplicate class labels, invalid step counts."""


class SiteValidationError(SurveysimError):
    """A loaded or constructed site violates grid invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__(
            f"{len(self.violations)} violation(s): " + "; ".join(self.violations[:5])
            + ("; ..." if len(self.violations) > 5 else "")
        )


class FormatErrorCode(Enum):
    MALFORMED_HEADER = "malformed_header"
    UNSUPPORTED_VERSION = "unsupported_version"
    TRUNCATED = "truncated"
    DIMENSION_MISMATCH = "dimension_mismatch"
    TILING_ERROR = "tiling_error"
    MANIFEST_ERROR = "manifest_error"
    NON_FINITE = "non_finite"


class SiteFormatError(SurveysimError):
    """A site/exemplar file is malformed. `code` names the failure class."""

    def __init__(self, code: FormatErrorCode, message: str):
        self.code = code
        super().__init__(f"[{code.value}] {message}")


class GenerationError(SurveysimError):
    """Synthetic world generation cannot satisfy the requested parameters."""


class DegenerateInputError(SurveysimError):
    """An input is degenerate for the requested operation: zero total
    ground-truth area, a target image with no non-target patches, or a
    regression over identical points."""
