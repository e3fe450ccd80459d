class CertkitError(Exception):
    """Base class for library errors."""


class SpecError(CertkitError, ValueError):
    """A FunctionSpec (or restriction) is malformed."""


class DimensionError(CertkitError, ValueError):
    """An exhaustive routine was asked for a dimension it cannot enumerate."""


class NotMonotoneError(CertkitError, ValueError):
    """A routine that is only sound for monotone functions got a non-monotone oracle."""


class ConstantFunctionError(CertkitError, ValueError):
    """The operation needs a nonconstant function."""


class CertificationError(CertkitError, RuntimeError):
    """A certification algorithm gave up (iteration cap, invalid input certificate)."""


class IterationCapExceeded(CertificationError):
    """The loop ran past its cap: estimation failed or k was under-claimed."""


class VerificationFailed(CertificationError):
    """The final certificate did not pass the monotone one-query verification."""


class EnumerationBudgetExceeded(CertkitError, ValueError):
    """Too many candidate sets to enumerate."""
