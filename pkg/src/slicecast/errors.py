"""Shared error types."""


class ConfigError(ValueError):
    """A scene/render configuration is inconsistent or incomplete."""
