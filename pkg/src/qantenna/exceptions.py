"""Exception types raised by qantenna."""


class QantennaError(Exception):
    """Base class for package errors."""


class SizeLimitError(QantennaError, ValueError):
    """Problem too large for the combinatorial oracle."""


class IntegrationError(QantennaError, RuntimeError):
    """Maxwell-Bloch integration left the physical range (step blow-up)."""
