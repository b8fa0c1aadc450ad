"""Exception types shared by the numeric core and the CLI."""


class ParameterDomainError(ValueError):
    """An argument lies outside the domain of the formula it feeds."""


class NumericalFailure(ArithmeticError):
    """Base for failures the CLI maps to exit code 4."""


class TruncationError(NumericalFailure):
    def __init__(self, message: str, achieved_bound: float, terms: int):
        super().__init__(message)
        self.achieved_bound = achieved_bound
        self.terms = terms


class NonConvergentError(NumericalFailure):
    """The Boltzmann sum over the spectrum has no finite value."""


class SingularityError(NumericalFailure):
    """A closed form was evaluated at (or too near) a pole of its denominator."""
