"""Exception types shared across the package."""


class PolymerError(Exception):
    """Base class for package errors."""


class InfeasibleQuery(PolymerError):
    """No target member dominates any source member (or the enumeration
    required by the query is unbounded)."""


class DegenerateRegion(PolymerError):
    """Parallelogram axis is parallel to the anti-diagonal direction."""


class InsufficientData(PolymerError):
    """An estimator was given fewer samples than it needs."""


class NonpositiveData(PolymerError):
    """A log-log fit was given nonpositive abscissas or ordinates."""


class ConfigInvalid(PolymerError):
    """Experiment configuration failed validation."""


class ManifestMismatch(PolymerError):
    """Resume attempted against an output directory whose manifest hash
    does not match the supplied configuration."""
