"""Exception hierarchy shared by all bbupool modules."""


class BbuPoolError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BbuPoolError, ValueError):
    """Input violates a domain invariant (CLI maps this to exit code 2)."""


class InvalidMcs(ValidationError):
    pass


class InvalidPrb(ValidationError):
    pass


class UnsupportedCyclicPrefix(ValidationError):
    pass


class FrequencyBelowMinimum(ValidationError):
    def __init__(self, f_ghz, floor_ghz=2.5):
        super().__init__(
            f"CPU frequency {f_ghz} GHz is below the {floor_ghz} GHz minimum "
            "required to keep eNB/UE synchronization"
        )
        self.f_ghz = f_ghz
        self.floor_ghz = floor_ghz


class UnknownParameter(ValidationError):
    pass


class NegativeThroughput(ValidationError):
    pass


class UnknownPrb(ValidationError):
    pass


class SchemaViolation(ValidationError):
    pass


class MonotonicityViolation(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


class Unidentifiable(ValidationError):
    pass


class DegenerateX(ValidationError):
    pass


class FitRejected(ValidationError):
    pass


class UnknownHeader(ValidationError):
    pass


class MalformedRow(ValidationError):
    def __init__(self, row, reason):
        super().__init__(f"row {row}: {reason}")
        self.row = row
        self.reason = reason


class InvalidScenario(ValidationError):
    pass


class InfeasibleItem(ValidationError):
    pass


class InfeasibleBudget(ValidationError):
    pass
