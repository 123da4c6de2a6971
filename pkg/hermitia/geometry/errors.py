"""Exception hierarchy shared by every geometry module."""


class HermitiaError(Exception):
    """Base class for all library errors."""


class StructuralError(HermitiaError):
    """Shape, order, flavor or bidegree mismatch between operands."""


class OrderExhaustedError(HermitiaError):
    """A derivative was requested from a jet with no orders left."""


class SingularSeriesError(HermitiaError):
    """A jet or matrix of jets with a singular constant term was inverted."""


class DomainError(HermitiaError):
    """Point outside the admissible domain of a metric field."""


class ValidationError(HermitiaError):
    pass


class PositivityError(ValidationError):
    def __init__(self, message, witness=None, min_eigenvalue=None):
        super().__init__(message)
        self.witness = witness
        self.min_eigenvalue = min_eigenvalue


class MetricFileError(HermitiaError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class HermitianConstraintError(MetricFileError):
    def __init__(self, message, frequency=None, line=None):
        super().__init__(message, line=line)
        self.frequency = frequency


class PreconditionError(HermitiaError):
    def __init__(self, message, coefficient=None):
        super().__init__(message)
        self.coefficient = coefficient


class FlowHalted(HermitiaError):
    def __init__(self, message, site=None, t=None):
        super().__init__(message)
        self.site = site
        self.t = t
