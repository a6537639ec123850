"""Exception hierarchy shared by every module."""


class QIGError(ValueError):
    """Base class for all domain errors raised by qigeom."""


class ValidationError(QIGError):
    """A value violates the invariants of its type (Hermiticity, invertibility, ...)."""


class HermiticityError(ValidationError):
    pass


class FaithfulnessError(ValidationError):
    pass


class ShapeError(QIGError):
    pass


class DomainError(QIGError):
    """Matrix function or kernel evaluated outside its domain."""


class ContractError(QIGError):
    """Arguments are individually valid but incompatible with each other."""


class StepTooLargeError(QIGError):
    """A finite-difference or integration step left the faithful cone."""


class ParseError(QIGError):
    pass
