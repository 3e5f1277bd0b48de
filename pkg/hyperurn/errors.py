"""
Errors - Exception hierarchy for urn validation, spectral analysis and simulation
"""


class HyperurnError(Exception):
    """Base class for every error raised by hyperurn"""


# Urn specification

class UnbalancedMatrix(HyperurnError, ValueError):
    """Core matrix rows do not share a common sum"""


class NonAffine(HyperurnError, ValueError):
    """Some sample in the simplex has a fractional replacement vector"""


class Untenable(HyperurnError, ValueError):
    """Some replacement removes more balls of a color than were drawn"""


class InsufficientInitial(HyperurnError, ValueError):
    """Initial urn holds fewer balls than one sample needs"""


# Sampling and evolution

class InfeasibleSample(HyperurnError, ValueError):
    """Sample asks for more balls of a color than the urn holds"""


class ExhaustedUrn(HyperurnError, RuntimeError):
    """Urn holds fewer balls than the sample size"""


# Asymptotics

class DegenerateLeading(HyperurnError, RuntimeError):
    """Leading eigenvalue is not simple"""


class LargeOrCriticalIndex(HyperurnError, RuntimeError):
    """Core index is not below 1/2, so no Gaussian limit with sqrt(n) scaling"""


class SolveFailure(HyperurnError, RuntimeError):
    """Sylvester operator singular or residual too large"""


# Oracle

class StateSpaceExceeded(HyperurnError, RuntimeError):
    """Exact enumeration would exceed the state cap"""

    def __init__(self, requested_n: int, attained_n: int, cap: int):
        self.requested_n = requested_n
        self.attained_n = attained_n
        self.cap = cap
        super().__init__(
            f"Support bound exceeds cap {cap} at n={requested_n}; "
            f"largest enumerable n is {attained_n}"
        )


# Monte Carlo

class InsufficientReplications(HyperurnError, ValueError):
    """Fewer than two replications"""


class SingularCovariance(HyperurnError, RuntimeError):
    """Sample covariance is singular"""


class DimensionTooHigh(HyperurnError, ValueError):
    """Not more samples than dimensions"""
