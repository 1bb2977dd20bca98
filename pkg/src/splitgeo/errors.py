"""Exception hierarchy shared by every module."""


class SplitGeoError(Exception):
    """Base class for all library errors."""


class DomainViolation(SplitGeoError):
    """A point lies outside the region where a field is defined."""

    def __init__(self, message, coordinate=None):
        super().__init__(message)
        self.coordinate = coordinate


class OutOfDomain(DomainViolation):
    pass


class DomainError(DomainViolation):
    """Logarithm argument of a Liouville-ansatz potential is not positive."""


class UnsupportedDerivative(SplitGeoError):
    pass


class InvalidLambda(SplitGeoError):
    pass


class BlockMismatch(SplitGeoError):
    pass


class StepUnderflow(SplitGeoError):
    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


class InvalidParameters(SplitGeoError):
    """Closed-form constants violate a family invariant (e.g. A+B = 0)."""


class LogDomain(SplitGeoError):
    pass


class BranchCut(SplitGeoError):
    pass


class NonRealResult(SplitGeoError):
    def __init__(self, message, residue=None):
        super().__init__(message)
        self.residue = residue


class BracketFailure(SplitGeoError):
    pass


class GridTooSmall(SplitGeoError):
    pass


class DegenerateBasis(SplitGeoError):
    pass


class InvalidC(SplitGeoError):
    pass


class NonRealEigenvalue(SplitGeoError):
    pass


class ConfigError(SplitGeoError):
    """Base for configuration problems (exit code 1)."""


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    pass
