"""Exception taxonomy shared across the package.

Everything derives from ValueError so callers who do not care about the
distinction can catch one type. The CLI maps these onto exit codes.
"""


class InvalidInputError(ValueError):
    """An argument violates a stated precondition."""


class ConstantsOutOfRangeError(InvalidInputError):
    """Derived constants leave the range where the rate formula is meaningful."""


class SchemaError(InvalidInputError):
    """A config document is malformed. `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class UnsupportedModelError(InvalidInputError):
    """Operation not defined for this model variant."""


class NoEquilibriumError(UnsupportedModelError):
    """Model has no closed-form equilibrium to sample."""


class InvalidWeightError(InvalidInputError):
    """Weight tag unknown or incompatible with the model."""


class StabilityLimitError(InvalidInputError):
    """Requested integrator step exceeds the computed stability limit."""

    def __init__(self, dt: float, limit: float):
        super().__init__(
            f"dt={dt:g} exceeds the stability limit {limit:g} for this state"
        )
        self.limit = limit


class MassClippedError(InvalidInputError):
    """Too much ensemble mass fell outside the comparison binning box."""


class NonConvergedError(RuntimeError):
    """Iterative solve stopped before reaching tolerance. Carries the report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
