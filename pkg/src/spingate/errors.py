"""Exception taxonomy. Exit-code mapping lives in cli."""


class SpingateError(Exception):
    """Base class for all package errors."""


class ContractViolationError(SpingateError):
    """An input violates a documented precondition or type invariant."""


class DegenerateDriveError(SpingateError):
    """Drive parameters make a derived quantity ill-defined (e.g. Omega = 0)."""


class InfeasibleTargetError(SpingateError):
    """A synthesis target lies outside the attainable range."""

    def __init__(self, message, attainable=None):
        super().__init__(message)
        self.attainable = attainable


class DistinctnessError(SpingateError):
    """Synthesis produced omega01 = omega02; spins must stay distinguishable."""


class SynthesisError(SpingateError):
    """Fixed-point or residual failure during control synthesis."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class CyclicityError(SpingateError):
    """Initial state is not cyclic over the trajectory."""

    def __init__(self, message, overlap=None):
        super().__init__(message)
        self.overlap = overlap


class IntegratorAccuracyError(SpingateError):
    """Convergence certificate failed."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(SpingateError):
    """Config document could not be parsed or validated."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
