__all__ = (
    'HKDelayError',
    'ScenarioError',
    'DomainError',
    'InfluenceError',
    'IntegrationError',
    'CertificateError'
)


class HKDelayError(Exception):
    """Base class for every error raised by this package."""

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail


class ScenarioError(HKDelayError, ValueError):
    """Scenario document cannot be parsed or violates a model invariant."""


class DomainError(HKDelayError, ValueError):
    """A function was evaluated outside of its domain."""


class InfluenceError(HKDelayError, ArithmeticError):
    """Influence function returned a value incompatible with its bounds."""


class IntegrationError(HKDelayError, ArithmeticError):
    """Integration produced non-finite values or was misconfigured."""


class CertificateError(HKDelayError):
    """Consensus certificate cannot be issued for the given bounds."""
