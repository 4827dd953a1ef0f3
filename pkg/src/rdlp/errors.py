"""Exception types shared across the package."""


class DataError(ValueError):
    """Malformed or unusable input data (CSV rows, empty sets, ...)."""


class ConfigError(ValueError):
    """Invalid experiment, matrix or synthetic-spec configuration."""


class ParameterError(ValueError):
    """Clustering parameters that violate an algorithm's requirements."""


class MetricError(ValueError):
    """A validity index or score is undefined for the given cluster set."""
