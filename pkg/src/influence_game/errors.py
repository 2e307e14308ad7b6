"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration value or file failed validation."""


class InvalidDimensionError(ConfigError):
    """Requested graph dimensions cannot produce a simple undirected graph."""


class InvalidParameterError(ConfigError):
    """An operation parameter is outside its valid range."""


class UnsupportedTopologyError(ConfigError):
    """The requested operation needs a topology kind the graph does not have."""
