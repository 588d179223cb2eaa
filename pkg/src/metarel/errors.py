"""Exception types shared across the package.

The CLI maps these onto exit codes: usage errors exit 2, numeric/accuracy
errors exit 3, ingest errors exit 4.
"""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """Inconsistent model/query configuration (layer counts, missing fields)."""


class CalibrationError(RuntimeError):
    """Coefficient calibration is degenerate or failed to converge."""


class AccuracyError(RuntimeError):
    """A numerical procedure failed its built-in accuracy check."""


class SearchError(RuntimeError):
    """A root/bisection search has no bracket on the given interval."""


class ScenarioError(ValueError):
    """Absorption-table shape does not match the requested solution scheme."""


class IngestError(ValueError):
    """External data (absorption table, curve CSV) failed validation."""


class UsageError(ValueError):
    """Invalid command-line or sweep specification."""
