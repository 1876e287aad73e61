"""Exception hierarchy shared across the package."""


class GridVaultError(Exception):
    """Base class for all domain errors."""


class MalformedAddress(GridVaultError):
    """A1-style cell reference could not be parsed."""


class FormatError(GridVaultError):
    """Input bytes do not match the expected format."""


class ConstraintError(GridVaultError):
    """Input parsed but violates a model invariant."""


class UnsupportedFeature(GridVaultError):
    """Recognized input that this build deliberately does not handle."""


class NotFound(GridVaultError):
    """Referenced workbook, commit, object or rule does not exist."""


class StoreCorrupt(GridVaultError):
    """On-disk object failed its integrity check."""


class ConcurrentWriter(GridVaultError):
    """Write lock could not be acquired before the timeout."""


class MalformedRegion(GridVaultError):
    """Region string or rectangle is not well-formed."""


class RuleInvalid(GridVaultError):
    """Alert rule violates its invariants."""


class DuplicateRuleId(GridVaultError):
    """Rule id already registered for this workbook."""


class WindowTooShort(GridVaultError):
    """Pattern classification needs at least two values."""


class SeriesTooShort(GridVaultError):
    """Statistical series needs at least two values."""


class NonNumericSeries(GridVaultError):
    """Statistical series contains a non-numeric value."""


class LengthMismatch(GridVaultError):
    """Paired series must have equal lengths."""


class ManifestInvalid(GridVaultError):
    """Change manifest violates its invariants."""


class PathNotFound(GridVaultError):
    """Filesystem path given to discovery does not exist."""
