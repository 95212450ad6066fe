"""
Exception hierarchy for senbe.

Every error raised on purpose by the library derives from :class:`SenbeError`.
Errors caused by bad input additionally derive from :class:`ValueError`, so
callers that only care about "invalid argument" can keep catching that.
"""


class SenbeError(Exception):
    """Base class for all senbe errors."""


class DomainError(SenbeError, ValueError):
    """An argument lies outside the domain of a function or transform."""


class ParameterRangeError(DomainError):
    """A proof parameter violates its admissible range.

    Attributes
    ----------
    field : str
        Name of the offending parameter (``"alpha"``, ``"eps4"``, ...).
    value : float
        The rejected value.
    """

    def __init__(self, field: str, value: float, bound: str) -> None:
        self.field = field
        self.value = value
        self.bound = bound
        super().__init__(f"{field}={value!r} violates {bound}")


class ConfigurationError(SenbeError, ValueError):
    """Invalid configuration: bad constants, empty seed list, environment value."""


class SpecSyntaxError(ConfigurationError):
    """A distribution spec string does not follow the grammar."""


class UnsupportedSpecError(ConfigurationError):
    """The distribution spec cannot serve the requested operation."""


class MomentDivergenceError(SenbeError, ArithmeticError):
    """A moment required by the computation is infinite.

    Attributes
    ----------
    order : float
        Smallest moment order that fails to exist.
    """

    def __init__(self, order: float, law: str) -> None:
        self.order = order
        self.law = law
        super().__init__(f"moment diverges: E|X|^{order:g} is infinite for {law}")


class DegenerateSampleError(SenbeError, ValueError):
    """An empirical sample has zero variance."""


class DegenerateMomentsError(SenbeError, ValueError):
    """beta2 or beta3 is zero, so no bound can be formed."""


class LyapunovViolationError(SenbeError, ValueError):
    """rho3 < 1, which is impossible for a unit-variance law."""


class InfeasibleTruncationError(SenbeError, ValueError):
    """No zero-mean truncation window exists for the requested cut."""


class TruncationContractError(SenbeError, ValueError):
    """A supplied truncation window does not leave the variable zero-mean."""
