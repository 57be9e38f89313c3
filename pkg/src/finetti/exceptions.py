class ValidationError(ValueError):
    """Invalid model, event or parameter."""


class ExactCapError(ValidationError):
    """An exact computation was requested beyond its size cap."""


class NumericalError(ArithmeticError):
    """A numerical routine failed; ``diagnostics`` carries what is known."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ConvergenceError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass
