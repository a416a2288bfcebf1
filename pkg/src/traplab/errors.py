"""Exception types shared across traplab."""


class TraplabError(Exception):
    """Base class for all package errors."""


class DomainError(TraplabError, ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(TraplabError, ArithmeticError):
    """A series did not reach the requested tolerance within its term budget."""


class DivergenceError(ConvergenceError):
    """A series or limit is known to diverge for the given parameters."""


class ParameterRegimeError(TraplabError, ValueError):
    """The model parameters fall outside the regime where a closed form holds."""


class DegenerateSampleError(TraplabError, ValueError):
    """A sample cannot support the requested estimate (empty, constant, ...)."""
