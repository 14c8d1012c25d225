"""Exception types raised by the numerical routines."""


class BohmChaosError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(BohmChaosError):
    """A computation could not be carried out at the requested accuracy."""


class NearNode(NumericalError):
    """The evaluation point sits on (or numerically at) the nodal set, G <= g_floor."""

    def __init__(self, message="G below floor", t=None):
        super().__init__(message)
        self.t = t


class NodalAtInfinity(NumericalError):
    """The nodal point is at infinity at this time (a sine denominator vanishes)."""

    def __init__(self, t):
        super().__init__(f"nodal point at infinity near t={t!r}")
        self.t = t


class StepUnderflow(NumericalError):
    def __init__(self, t, h):
        super().__init__(f"step size {h:.3e} below minimum at t={t!r}")
        self.t = t
        self.h = h


class NoConvergence(NumericalError):
    pass


class DegenerateSaddle(NumericalError):
    pass


class DomainExceeded(NumericalError):
    pass


class DegenerateFit(NumericalError):
    pass


class EmptyInterval(BohmChaosError):
    pass


class UnknownRecipe(BohmChaosError, KeyError):
    def __str__(self):
        return f"unknown recipe {self.args[0]!r}"


class ConfigError(BohmChaosError, ValueError):
    pass
