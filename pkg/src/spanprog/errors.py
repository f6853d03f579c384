"""Exception hierarchy shared across the toolkit.

Validation errors (malformed inputs) and assertion/bound violations are kept
distinct so the CLI can map them to different exit codes.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ToolkitError):
    """Malformed or out-of-contract input."""


class BoundViolation(ToolkitError):
    """A verified quantity fell outside its guaranteed bound."""


# -- validation-flavoured errors ---------------------------------------------

class MalformedProgram(ValidationError):
    pass


class NotAccepted(ValidationError):
    pass


class NotRejected(ValidationError):
    pass


class DegenerateTarget(ValidationError):
    """The target has a component outside col(A): a zero-cost negative witness exists."""


class TargetUnreachable(ValidationError):
    pass


class InfeasibleBudget(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class NotApproximating(ValidationError):
    pass


class AlreadyReal(ValidationError):
    pass


class NotUnitary(ValidationError):
    pass


class KappaTooLarge(ValidationError):
    pass


class ZeroRejection(ValidationError):
    pass


class NotBoundedError(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class NoZeroEigenmass(ValidationError):
    pass


class NotMonotone(ValidationError):
    pass


class SupportViolation(ValidationError):
    pass


class PreconditionViolated(ValidationError):
    pass


class CoverInvalid(ValidationError):
    pass


class NotACertificate(ValidationError):
    pass


class NotCovering(ValidationError):
    pass


# -- bound-flavoured errors --------------------------------------------------

class BoundViolated(BoundViolation):
    pass
