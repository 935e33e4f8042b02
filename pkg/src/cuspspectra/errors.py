"""Exceptions raised by the numerical pipelines."""


class UnderResolvedError(RuntimeError):
    """A quadrature result moved by more than its tolerance under refinement."""

    def __init__(self, message, coarse=None, fine=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine


class DomainError(ValueError):
    """A formula was evaluated at a pole it cannot represent."""
