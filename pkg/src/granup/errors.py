"""Exception hierarchy shared by every layer of the model."""


class GranupError(Exception):
    pass


class InvalidStateError(GranupError, ValueError):
    """State violates a domain requirement (e.g. p_c + c <= 0)."""


class GradientSingularError(GranupError, ValueError):
    """Yield gradient requested outside the closed meridian domain."""


class CalibrationError(GranupError, ValueError):
    pass


class SaturationError(GranupError, ValueError):
    """Plastic volumetric strain beyond the densification capacity."""


class CouplingDegeneracyError(GranupError, ArithmeticError):
    """The irreversible/plastic coupling operator lost invertibility."""


class LossOfStabilityError(GranupError, ArithmeticError):
    """Non-positive consistency denominator h + Q.E[P]."""


class NumericalError(GranupError, ArithmeticError):
    pass


class ConvergenceError(GranupError, ArithmeticError):
    pass


class FitError(GranupError, ValueError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(GranupError, ValueError):
    pass
