"""Exception hierarchy shared by every module."""


class FreeLunchError(Exception):
    """Base class for all package errors."""


class DomainError(FreeLunchError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonDifferenceKernel(DomainError):
    """A difference-kernel operation was called on a two-parameter kernel."""


class SingularDerivative(DomainError):
    """The time derivative of the kernel is singular at the requested point."""


class SingularityError(DomainError):
    """A grid evaluation hit a kernel singularity (e.g. entry time t0 = 0)."""


class LengthMismatch(DomainError):
    pass


class GDomainError(DomainError):
    """A tabulated price map cannot cover the realised log-price range."""


class NumericalError(FreeLunchError, ArithmeticError):
    """Base class for numerical failures (quadrature, divergence)."""


class QuadratureFailure(NumericalError):
    pass


class DivergentIntegral(NumericalError):
    pass


class EnumerationTooLarge(FreeLunchError):
    pass


class HypothesisViolated(FreeLunchError):
    """A detector's hypotheses do not hold; ``hypothesis`` names the one that failed."""

    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        self.detail = detail
        msg = hypothesis if not detail else f"{hypothesis}: {detail}"
        super().__init__(msg)


class ConfigError(FreeLunchError, ValueError):
    pass
