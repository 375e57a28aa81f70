"""Exception hierarchy shared across the package."""


class MsoscError(Exception):
    """Base class for all errors raised by msosc."""


class NonPositiveV(MsoscError, ValueError):
    pass


class SingularDenominator(MsoscError, ArithmeticError):
    pass


class DegenerateDenominator(MsoscError, ArithmeticError):
    pass


class RootFindFailure(MsoscError, RuntimeError):
    pass


class NoConvergence(MsoscError, RuntimeError):
    pass


class StageIterationDiverged(MsoscError, RuntimeError):
    pass


class NonFiniteState(MsoscError, FloatingPointError):
    pass


class ScheduleGap(MsoscError, ValueError):
    pass


class DomainError(MsoscError, ValueError):
    pass


class EnergyTooLow(MsoscError, ValueError):
    pass


class CollisionSingularity(MsoscError, ArithmeticError):
    pass


class InvalidSpec(MsoscError, ValueError):
    """Raised for malformed sweep specifications or CLI input."""
