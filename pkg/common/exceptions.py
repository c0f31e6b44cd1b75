"""Domain errors shared by every app.

All errors are ``ValidationError`` subclasses so callers can catch the whole
family with one ``except ValidationError`` and read a stable ``code``.
"""

from django.core.exceptions import ValidationError


class NeedleCompError(ValidationError):
    default_code = 'needlecomp_error'

    def __init__(self, message, code=None, params=None):
        super().__init__(message, code=code or self.default_code, params=params)

    def __str__(self):
        return self.message % self.params if self.params else str(self.message)


class DegenerateInputError(NeedleCompError):
    default_code = 'degenerate_input'


class PreconditionViolation(NeedleCompError):
    default_code = 'precondition_violation'


class DomainError(NeedleCompError):
    default_code = 'domain_error'


class ParameterMismatchError(NeedleCompError):
    default_code = 'parameter_mismatch'


class SizeCapExceeded(NeedleCompError):
    default_code = 'size_cap_exceeded'


class EmptyClassError(NeedleCompError):
    default_code = 'empty_class'


class EmptyRayError(NeedleCompError):
    default_code = 'empty_ray'


class UnsupportedParameterError(NeedleCompError):
    default_code = 'unsupported_parameter'


class InputParseError(NeedleCompError):
    default_code = 'parse_error'


class DegenerateDecompositionWarning(UserWarning):
    """Too much mass was left outside every extracted ray."""
